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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mdepth/network.hpp"

namespace mdepth {

// Checkpoint container: "M4DC", u32 version, u32 count, then per tensor
// u32 name length, name bytes, u32 rank, rank x u32 dims, f32 data. All
// integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path);

// The network configuration travels as the first entry: an empty tensor
// whose name is "#config\n" followed by the key=value text.
void save_checkpoint(const std::filesystem::path& path, const DepthNetwork<float>& net);
DepthNetwork<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace mdepth
