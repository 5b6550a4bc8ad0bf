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

#include <span>
#include <vector>

#include "mdepth/camera.hpp"
#include "mdepth/tensor.hpp"

namespace mdepth {

// ---------------------------------------------------------------------------
// Spatial reprojection (warping).
//
// For every target pixel at time t, the coordinates at t-1 are obtained from
// the depth map at t and the camera motion, then the t-1 source map is
// sampled there bilinearly. A pixel is valid when the sample point lies inside
// [0, W-1] x [0, H-1] and in front of the previous camera; invalid pixels are
// zero in the output and 0 in the validity mask.
//
// Gradients flow into the source map only. The depth map that drives the
// coordinates is treated as a constant: its gradient is identically zero.
// ---------------------------------------------------------------------------

template <typename T>
struct BasicWarpResult {
  BasicTensor<T> warped;
  BasicTensor<T> validity;  // H x W x 1, values in {0, 1}
};

using WarpResult = BasicWarpResult<float>;

template <typename T>
struct BasicWarpGradients {
  BasicTensor<T> source;
  BasicTensor<T> depth;  // always zero
};

// Sampling pattern derived from (depth_t, motion, intrinsics). Reusable for
// any source map of the same spatial size.
class WarpPlan {
 public:
  template <typename T>
  WarpPlan(const BasicTensor<T>& depth_t, const RigidTransform& motion, const Intrinsics& k);

  int height() const { return height_; }
  int width() const { return width_; }

  // With transform_depth_values, `source` must be single-channel depth at t-1
  // and each sampled value is re-expressed as z-depth in the frame at t.
  template <typename T>
  BasicWarpResult<T> apply(const BasicTensor<T>& source, bool transform_depth_values) const;

  // Gradient with respect to `source`, given the forward result's validity.
  template <typename T>
  BasicTensor<T> backward(const BasicTensor<T>& grad_warped, const BasicTensor<T>& validity,
                          const Shape& source_shape, bool transform_depth_values) const;

 private:
  struct Sample {
    int i0, i1, j0, j1;
    double wi, wj;  // fractional weights of i1 / j1
    double depth_gain;  // d z_t / d z_{t-1} along the sampled ray
    bool in_frame;
  };

  int height_ = 0;
  int width_ = 0;
  double depth_offset_ = 0.0;  // -t_z
  std::vector<Sample> samples_;
};

template <typename T>
BasicWarpResult<T> warp(const BasicTensor<T>& source_prev, const BasicTensor<T>& depth_t,
                        const RigidTransform& motion, const Intrinsics& k,
                        bool transform_depth_values);

template <typename T>
BasicWarpGradients<T> warp_backward(const BasicTensor<T>& source_prev,
                                    const BasicTensor<T>& depth_t, const RigidTransform& motion,
                                    const Intrinsics& k, bool transform_depth_values,
                                    const BasicTensor<T>& grad_warped);

// ---------------------------------------------------------------------------
// Correlation cost volume.
// ---------------------------------------------------------------------------

// (1/L) * sum_i x1_i * x2_i
double cost(std::span<const float> x1, std::span<const float> x2);
double cost(std::span<const double> x1, std::span<const double> x2);

// Output channel of offset (kj, ki), both in [-r, r] (kj vertical).
constexpr int cost_volume_channel(int kj, int ki, int r) {
  return (kj + r) * (2 * r + 1) + (ki + r);
}

// out(y, x, cost_volume_channel(kj, ki, r)) = cost(f1(y, x), f2(y + kj, x + ki)),
// zero when the neighbor is outside the frame.
template <typename T>
BasicTensor<T> cost_volume(const BasicTensor<T>& f1, const BasicTensor<T>& f2, int r);

template <typename T>
struct CostVolumeGradients {
  BasicTensor<T> f1;
  BasicTensor<T> f2;
};

template <typename T>
CostVolumeGradients<T> cost_volume_backward(const BasicTensor<T>& f1, const BasicTensor<T>& f2,
                                            int r, const BasicTensor<T>& grad_output);

}  // namespace mdepth
