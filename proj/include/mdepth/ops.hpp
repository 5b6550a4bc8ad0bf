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
#include <span>
#include <vector>

#include "mdepth/tensor.hpp"

namespace mdepth {

// Depth range enforced by the log-depth codec, in meters.
struct DepthRange {
  double min = 0.1;
  double max = 200.0;
};

// ---------------------------------------------------------------------------
// 3x3 convolution, zero padding 1, stride 1 or 2.
//
// Weights are laid out [ky][kx][c_in][c_out] (a (9*c_in) x c_out matrix), so
// the forward pass is one im2col + GEMM. Output is ceil(H/s) x ceil(W/s).
// ---------------------------------------------------------------------------

struct ConvGeometry {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
};

template <typename T>
BasicTensor<T> conv3x3_forward(const BasicTensor<T>& input, std::span<const T> weights,
                               std::span<const T> bias, const ConvGeometry& g);

// Accumulates into grad_weights / grad_bias. Returns the input gradient, or an
// empty tensor when want_input_grad is false.
template <typename T>
BasicTensor<T> conv3x3_backward(const BasicTensor<T>& input, std::span<const T> weights,
                                const BasicTensor<T>& grad_output, const ConvGeometry& g,
                                std::span<T> grad_weights, std::span<T> grad_bias,
                                bool want_input_grad = true);

template <typename T>
BasicTensor<T> conv3x3(const BasicTensor<T>& input, const BasicParamTensor<T>& weights,
                       const BasicParamTensor<T>& bias, int stride);

template <typename T>
BasicTensor<T> conv3x3_backward(const BasicTensor<T>& input, BasicParamTensor<T>& weights,
                                BasicParamTensor<T>& bias, int stride,
                                const BasicTensor<T>& grad_output);

// ---------------------------------------------------------------------------
// Activations.
// ---------------------------------------------------------------------------

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, T slope = T(0.1));

// `input` is the pre-activation tensor.
template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_output,
                                   T slope = T(0.1));

// ---------------------------------------------------------------------------
// Resampling, half-pixel aligned (align_corners = false).
// ---------------------------------------------------------------------------

template <typename T>
BasicTensor<T> resize_bilinear(const BasicTensor<T>& input, int out_height, int out_width);

template <typename T>
BasicTensor<T> resize_bilinear_backward(const BasicTensor<T>& grad_output, const Shape& input_shape);

template <typename T>
BasicTensor<T> resize_nearest(const BasicTensor<T>& input, int out_height, int out_width);

// ---------------------------------------------------------------------------
// Natural-log depth codec with clamping to `range`.
// ---------------------------------------------------------------------------

template <typename T>
BasicTensor<T> log_depth_encode(const BasicTensor<T>& depth, DepthRange range = {});

template <typename T>
BasicTensor<T> log_depth_decode(const BasicTensor<T>& log_depth, DepthRange range = {});

// ---------------------------------------------------------------------------
// Channel concatenation and its inverse.
// ---------------------------------------------------------------------------

template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>* const> parts);

// Slice channels [begin, begin + count) out of `t`.
template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, int begin, int count);

// ---------------------------------------------------------------------------
// Parameter initialization and optimization.
// ---------------------------------------------------------------------------

// Zero-mean normal samples with variance 2 / fan_in, deterministic in `seed`.
template <typename T>
void he_init(std::span<T> values, int fan_in, std::uint64_t seed);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update to every parameter using its accumulated grad.
  void step(std::span<BasicParamTensor<T>* const> params, double lr);

  long steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
};

}  // namespace mdepth
