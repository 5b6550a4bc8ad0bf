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
#include <string>
#include <vector>

namespace mdepth {

// Finite-difference verification of every hand-written backward pass, run in
// double precision.
struct GradcheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  long checked = 0;  // number of compared derivatives
  double seconds = 0.0;

  bool passed() const { return max_rel_error < tolerance; }
};

// Layer suites use central differences with step 1e-3 over every input
// entry. The end-to-end suite (2 levels, 32x32, two frames) checks one random
// unit direction plus sampled entries per parameter tensor, with a smaller
// step so that no leaky-ReLU or L1 kink is crossed.
inline constexpr double kLayerStep = 1e-3;
inline constexpr double kNetworkStep = 1e-6;
inline constexpr double kLayerTolerance = 1e-4;
inline constexpr double kNetworkTolerance = 1e-3;

// Suite names: conv3x3, leaky_relu, resize_bilinear, cost_volume, warp, network.
const std::vector<std::string>& gradcheck_suites();

// Runs the suites whose name equals `only` (all when empty).
std::vector<GradcheckResult> run_gradcheck(const std::string& only = {}, std::uint64_t seed = 1);

// Individual layer suites, exposed for property tests over seeds.
GradcheckResult gradcheck_conv3x3(std::uint64_t seed, int height, int width, int cin, int cout,
                                  int stride);
GradcheckResult gradcheck_leaky_relu(std::uint64_t seed, int height, int width, int channels);
GradcheckResult gradcheck_resize_bilinear(std::uint64_t seed, int height, int width, int channels,
                                          int out_height, int out_width);
GradcheckResult gradcheck_cost_volume(std::uint64_t seed, int height, int width, int channels,
                                      int radius);
GradcheckResult gradcheck_warp(std::uint64_t seed, int height, int width, int channels,
                               bool transform_depth_values);
GradcheckResult gradcheck_network(std::uint64_t seed, int samples_per_tensor = 2);

}  // namespace mdepth
