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

#include "mdepth/camera.hpp"
#include "mdepth/ops.hpp"
#include "mdepth/tensor.hpp"

namespace mdepth {

// Learning-free depth from a single cost-volume match per pixel.
struct TriangulationConfig {
  int radius = 4;                // cost-volume neighborhood
  double min_parallax_px = 0.5;  // below this the hypothesis is kept
  bool subpixel = true;          // parabolic refinement of the best offset
  int aggregate_radius = 2;      // box window summing costs before the argmax
  DepthRange range{};
};

// `f_prev_warped` is the previous feature map warped with `d_hypothesis`.
// Per pixel the best offset of the window-aggregated cost volume locates the
// match in the previous
// frame; the depth whose reprojection lands there is solved in least squares
// along both image axes. A zero offset keeps the hypothesis exactly.
// Throws DegenerateMotion when the translation norm is <= 1e-6 m.
Tensor triangulate_analytic(const Tensor& f_t, const Tensor& f_prev_warped,
                            const Tensor& d_hypothesis, const RigidTransform& motion,
                            const Intrinsics& k_level, const TriangulationConfig& cfg = {});

// Zero-mean, unit-norm grayscale patches of side 2 * radius + 1 (one channel
// per patch element). Flat patches map to zero vectors.
Tensor patch_descriptors(const Tensor& image, int radius);

}  // namespace mdepth
