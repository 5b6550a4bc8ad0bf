// Copyright 2026 The motiondepth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include "mdepth/tensor.hpp"

namespace mdepth {

// Portable float map, single channel, little-endian (scale -1.0), rows stored
// bottom to top.
void write_pfm(const std::filesystem::path& path, const Tensor& depth);
Tensor read_pfm(const std::filesystem::path& path);

// 8-bit RGB PNG. Values are clamped to [0, 1] and rounded to k / 255 when
// written; reading returns k / 255 exactly, so quantized images round-trip.
void write_png_rgb(const std::filesystem::path& path, const Tensor& rgb);
Tensor read_png_rgb(const std::filesystem::path& path);

// Rounds every value to the nearest k / 255 (the PNG-representable set).
void quantize_8bit(Tensor& rgb);

// Maps log depth over `range` to a blue-to-red ramp for inspection.
Tensor colorize_depth(const Tensor& depth, double min_depth, double max_depth);

}  // namespace mdepth
