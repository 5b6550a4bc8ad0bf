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

#include "mdepth/ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mdepth/simd/kernels.hpp"

namespace mdepth {

namespace {

int out_extent(int in, int stride) { return (in + stride - 1) / stride; }

// Row p of `col` holds the 3x3xC receptive field of output pixel p.
template <typename T>
void im2col(const BasicTensor<T>& in, int stride, int oh, int ow, std::vector<T>& col) {
  const int c = in.channels();
  const std::size_t kdim = static_cast<std::size_t>(9) * c;
  col.resize(static_cast<std::size_t>(oh) * ow * kdim);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      T* row = col.data() + (static_cast<std::size_t>(oy) * ow + ox) * kdim;
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = oy * stride + ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = ox * stride + kx - 1;
          T* dst = row + static_cast<std::size_t>(ky * 3 + kx) * c;
          if (iy < 0 || iy >= in.height() || ix < 0 || ix >= in.width()) {
            std::fill(dst, dst + c, T(0));
          } else {
            const T* src = in.pixel(iy, ix);
            std::copy(src, src + c, dst);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const std::vector<T>& col, int stride, int oh, int ow, BasicTensor<T>& grad_in) {
  const int c = grad_in.channels();
  const std::size_t kdim = static_cast<std::size_t>(9) * c;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const T* row = col.data() + (static_cast<std::size_t>(oy) * ow + ox) * kdim;
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = oy * stride + ky - 1;
        if (iy < 0 || iy >= grad_in.height()) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = ox * stride + kx - 1;
          if (ix < 0 || ix >= grad_in.width()) continue;
          const T* src = row + static_cast<std::size_t>(ky * 3 + kx) * c;
          T* dst = grad_in.pixel(iy, ix);
          for (int ci = 0; ci < c; ++ci) dst[ci] += src[ci];
        }
      }
    }
  }
}

void check_conv_args(const Shape& in, std::size_t n_weights, std::size_t n_bias,
                     const ConvGeometry& g) {
  if (g.stride != 1 && g.stride != 2) {
    throw Error(ErrorKind::kInvalidArgument, "conv3x3 stride must be 1 or 2");
  }
  if (in.channels != g.in_channels) {
    throw Error(ErrorKind::kShapeMismatch,
                "conv3x3 input has " + std::to_string(in.channels) + " channels, weights expect " +
                    std::to_string(g.in_channels));
  }
  if (n_weights != static_cast<std::size_t>(9) * g.in_channels * g.out_channels ||
      n_bias != static_cast<std::size_t>(g.out_channels)) {
    throw Error(ErrorKind::kShapeMismatch, "conv3x3 weight/bias sizes do not match geometry");
  }
}

ConvGeometry geometry_of(const std::vector<int>& dims, int stride) {
  if (dims.size() != 4 || dims[0] != 3 || dims[1] != 3) {
    throw Error(ErrorKind::kShapeMismatch, "conv3x3 weights must be 3x3xCinxCout");
  }
  return {dims[2], dims[3], stride};
}

}  // namespace

template <typename T>
BasicTensor<T> conv3x3_forward(const BasicTensor<T>& input, std::span<const T> weights,
                               std::span<const T> bias, const ConvGeometry& g) {
  check_conv_args(input.shape(), weights.size(), bias.size(), g);
  const int oh = out_extent(input.height(), g.stride);
  const int ow = out_extent(input.width(), g.stride);
  BasicTensor<T> out(oh, ow, g.out_channels);
  const int rows = oh * ow;
  for (int p = 0; p < rows; ++p) {
    std::copy(bias.begin(), bias.end(), out.data() + static_cast<std::size_t>(p) * g.out_channels);
  }
  thread_local std::vector<T> col;
  im2col(input, g.stride, oh, ow, col);
  const int kdim = 9 * g.in_channels;
  simd::gemm(simd::Trans::kNo, simd::Trans::kNo, rows, g.out_channels, kdim, col.data(), kdim,
             weights.data(), g.out_channels, out.data(), g.out_channels, true);
  check_finite(out.values(), "conv3x3_forward");
  return out;
}

template <typename T>
BasicTensor<T> conv3x3_backward(const BasicTensor<T>& input, std::span<const T> weights,
                                const BasicTensor<T>& grad_output, const ConvGeometry& g,
                                std::span<T> grad_weights, std::span<T> grad_bias,
                                bool want_input_grad) {
  check_conv_args(input.shape(), weights.size(), grad_bias.size(), g);
  const int oh = out_extent(input.height(), g.stride);
  const int ow = out_extent(input.width(), g.stride);
  require_shape(grad_output.shape(), Shape{oh, ow, g.out_channels}, "conv3x3_backward");
  if (grad_weights.size() != weights.size()) {
    throw Error(ErrorKind::kShapeMismatch, "conv3x3_backward weight grad size");
  }
  const int rows = oh * ow;
  const int kdim = 9 * g.in_channels;

  for (int co = 0; co < g.out_channels; ++co) {
    double acc = 0.0;
    for (int p = 0; p < rows; ++p) acc += grad_output[static_cast<std::size_t>(p) * g.out_channels + co];
    grad_bias[co] += static_cast<T>(acc);
  }

  thread_local std::vector<T> col;
  im2col(input, g.stride, oh, ow, col);
  simd::gemm(simd::Trans::kYes, simd::Trans::kNo, kdim, g.out_channels, rows, col.data(), kdim,
             grad_output.data(), g.out_channels, grad_weights.data(), g.out_channels, true);

  if (!want_input_grad) return {};
  simd::gemm(simd::Trans::kNo, simd::Trans::kYes, rows, kdim, g.out_channels, grad_output.data(),
             g.out_channels, weights.data(), g.out_channels, col.data(), kdim, false);
  BasicTensor<T> grad_in(input.shape());
  col2im_add(col, g.stride, oh, ow, grad_in);
  return grad_in;
}

template <typename T>
BasicTensor<T> conv3x3(const BasicTensor<T>& input, const BasicParamTensor<T>& weights,
                       const BasicParamTensor<T>& bias, int stride) {
  return conv3x3_forward<T>(input, weights.value.values(), bias.value.values(),
                            geometry_of(weights.dims, stride));
}

template <typename T>
BasicTensor<T> conv3x3_backward(const BasicTensor<T>& input, BasicParamTensor<T>& weights,
                                BasicParamTensor<T>& bias, int stride,
                                const BasicTensor<T>& grad_output) {
  return conv3x3_backward<T>(input, weights.value.values(), grad_output,
                             geometry_of(weights.dims, stride), weights.grad.values(),
                             bias.grad.values(), true);
}

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& input, T slope) {
  BasicTensor<T> out(input.shape());
  if constexpr (std::is_same_v<T, float>) {
    simd::leaky_relu_forward(input.data(), input.size(), slope, out.data());
  } else {
    for (std::size_t i = 0; i < input.size(); ++i)
      out[i] = input[i] >= T(0) ? input[i] : slope * input[i];
  }
  return out;
}

template <typename T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_output,
                                   T slope) {
  require_shape(grad_output.shape(), input.shape(), "leaky_relu_backward");
  BasicTensor<T> out(input.shape());
  if constexpr (std::is_same_v<T, float>) {
    simd::leaky_relu_backward(input.data(), grad_output.data(), input.size(), slope, out.data());
  } else {
    for (std::size_t i = 0; i < input.size(); ++i)
      out[i] = input[i] >= T(0) ? grad_output[i] : slope * grad_output[i];
  }
  return out;
}

namespace {

struct Tap {
  int i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, src - i0};
  }
  return taps;
}

}  // namespace

template <typename T>
BasicTensor<T> resize_bilinear(const BasicTensor<T>& input, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1) {
    throw Error(ErrorKind::kInvalidArgument, "resize target must be at least 1x1");
  }
  const int c = input.channels();
  const auto ty = bilinear_taps(input.height(), out_height);
  const auto tx = bilinear_taps(input.width(), out_width);
  BasicTensor<T> out(out_height, out_width, c);
  for (int y = 0; y < out_height; ++y) {
    const T wy1 = static_cast<T>(ty[y].w1);
    const T wy0 = T(1) - wy1;
    for (int x = 0; x < out_width; ++x) {
      const T wx1 = static_cast<T>(tx[x].w1);
      const T wx0 = T(1) - wx1;
      const T* p00 = input.pixel(ty[y].i0, tx[x].i0);
      const T* p01 = input.pixel(ty[y].i0, tx[x].i1);
      const T* p10 = input.pixel(ty[y].i1, tx[x].i0);
      const T* p11 = input.pixel(ty[y].i1, tx[x].i1);
      T* dst = out.pixel(y, x);
      for (int ch = 0; ch < c; ++ch) {
        dst[ch] = wy0 * (wx0 * p00[ch] + wx1 * p01[ch]) + wy1 * (wx0 * p10[ch] + wx1 * p11[ch]);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> resize_bilinear_backward(const BasicTensor<T>& grad_output, const Shape& input_shape) {
  const int c = input_shape.channels;
  if (grad_output.channels() != c) {
    throw Error(ErrorKind::kShapeMismatch, "resize_bilinear_backward channel count");
  }
  const auto ty = bilinear_taps(input_shape.height, grad_output.height());
  const auto tx = bilinear_taps(input_shape.width, grad_output.width());
  BasicTensor<T> grad_in(input_shape);
  for (int y = 0; y < grad_output.height(); ++y) {
    const T wy1 = static_cast<T>(ty[y].w1);
    const T wy0 = T(1) - wy1;
    for (int x = 0; x < grad_output.width(); ++x) {
      const T wx1 = static_cast<T>(tx[x].w1);
      const T wx0 = T(1) - wx1;
      const T* g = grad_output.pixel(y, x);
      T* p00 = grad_in.pixel(ty[y].i0, tx[x].i0);
      T* p01 = grad_in.pixel(ty[y].i0, tx[x].i1);
      T* p10 = grad_in.pixel(ty[y].i1, tx[x].i0);
      T* p11 = grad_in.pixel(ty[y].i1, tx[x].i1);
      for (int ch = 0; ch < c; ++ch) {
        p00[ch] += wy0 * wx0 * g[ch];
        p01[ch] += wy0 * wx1 * g[ch];
        p10[ch] += wy1 * wx0 * g[ch];
        p11[ch] += wy1 * wx1 * g[ch];
      }
    }
  }
  return grad_in;
}

template <typename T>
BasicTensor<T> resize_nearest(const BasicTensor<T>& input, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1) {
    throw Error(ErrorKind::kInvalidArgument, "resize target must be at least 1x1");
  }
  const auto pick = [](int in, int out) {
    std::vector<int> idx(out);
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
      idx[o] = std::min(in - 1, static_cast<int>(std::floor((o + 0.5) * scale)));
    }
    return idx;
  };
  const auto iy = pick(input.height(), out_height);
  const auto ix = pick(input.width(), out_width);
  const int c = input.channels();
  BasicTensor<T> out(out_height, out_width, c);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const T* src = input.pixel(iy[y], ix[x]);
      std::copy(src, src + c, out.pixel(y, x));
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> log_depth_encode(const BasicTensor<T>& depth, DepthRange range) {
  BasicTensor<T> out(depth.shape());
  const T lo = static_cast<T>(range.min);
  const T hi = static_cast<T>(range.max);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    // NaN and non-positive values fall to the floor.
    const T d = depth[i] > lo ? std::min(depth[i], hi) : lo;
    out[i] = std::log(d);
  }
  return out;
}

template <typename T>
BasicTensor<T> log_depth_decode(const BasicTensor<T>& log_depth, DepthRange range) {
  BasicTensor<T> out(log_depth.shape());
  const T lo = static_cast<T>(range.min);
  const T hi = static_cast<T>(range.max);
  for (std::size_t i = 0; i < log_depth.size(); ++i) {
    out[i] = std::clamp(std::exp(log_depth[i]), lo, hi);
  }
  return out;
}

template <typename T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>* const> parts) {
  if (parts.empty()) return {};
  const int h = parts[0]->height();
  const int w = parts[0]->width();
  int total = 0;
  for (const auto* p : parts) {
    if (p->height() != h || p->width() != w) {
      throw Error(ErrorKind::kShapeMismatch, "concat_channels spatial size mismatch");
    }
    total += p->channels();
  }
  BasicTensor<T> out(h, w, total);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      T* dst = out.pixel(y, x);
      for (const auto* p : parts) {
        const T* src = p->pixel(y, x);
        dst = std::copy(src, src + p->channels(), dst);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& t, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > t.channels()) {
    throw Error(ErrorKind::kShapeMismatch, "slice_channels out of range");
  }
  BasicTensor<T> out(t.height(), t.width(), count);
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < t.width(); ++x) {
      const T* src = t.pixel(y, x) + begin;
      std::copy(src, src + count, out.pixel(y, x));
    }
  }
  return out;
}

template <typename T>
void he_init(std::span<T> values, int fan_in, std::uint64_t seed) {
  if (fan_in < 1) throw Error(ErrorKind::kInvalidArgument, "he_init fan_in must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (T& v : values) v = static_cast<T>(dist(rng));
}

template <typename T>
void Adam<T>::step(std::span<BasicParamTensor<T>* const> params, double lr) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->numel(), T(0));
      v_.emplace_back(p->numel(), T(0));
    }
  }
  if (m_.size() != params.size()) {
    throw Error(ErrorKind::kInvalidArgument, "Adam parameter set changed between steps");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    T* val = p.value.data();
    const T* g = p.grad.data();
    T* m = m_[k].data();
    T* v = v_[k].data();
    const std::size_t n = p.numel();
    if constexpr (std::is_same_v<T, float>) {
      const simd::AdamCoeffs c{static_cast<float>(cfg_.beta1),
                               static_cast<float>(cfg_.beta2),
                               static_cast<float>(1.0 - cfg_.beta1),
                               static_cast<float>(1.0 - cfg_.beta2),
                               static_cast<float>(lr / bc1),
                               static_cast<float>(1.0 / bc2),
                               static_cast<float>(cfg_.eps)};
      simd::adam_update(val, g, m, v, n, c);
    } else {
      const T b1 = cfg_.beta1, b2 = cfg_.beta2, ob1 = 1.0 - cfg_.beta1, ob2 = 1.0 - cfg_.beta2;
      const T step = lr / bc1, bias2 = 1.0 / bc2, eps = cfg_.eps;
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + ob1 * g[i];
        v[i] = b2 * v[i] + ob2 * (g[i] * g[i]);
        val[i] = val[i] - step * m[i] / (std::sqrt(v[i] * bias2) + eps);
      }
    }
  }
}

#define MDEPTH_INSTANTIATE_OPS(T)                                                                \
  template BasicTensor<T> conv3x3_forward<T>(const BasicTensor<T>&, std::span<const T>,          \
                                             std::span<const T>, const ConvGeometry&);           \
  template BasicTensor<T> conv3x3_backward<T>(const BasicTensor<T>&, std::span<const T>,         \
                                              const BasicTensor<T>&, const ConvGeometry&,        \
                                              std::span<T>, std::span<T>, bool);                 \
  template BasicTensor<T> conv3x3<T>(const BasicTensor<T>&, const BasicParamTensor<T>&,          \
                                     const BasicParamTensor<T>&, int);                           \
  template BasicTensor<T> conv3x3_backward<T>(const BasicTensor<T>&, BasicParamTensor<T>&,       \
                                              BasicParamTensor<T>&, int, const BasicTensor<T>&); \
  template BasicTensor<T> leaky_relu<T>(const BasicTensor<T>&, T);                               \
  template BasicTensor<T> leaky_relu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,   \
                                                 T);                                             \
  template BasicTensor<T> resize_bilinear<T>(const BasicTensor<T>&, int, int);                   \
  template BasicTensor<T> resize_bilinear_backward<T>(const BasicTensor<T>&, const Shape&);      \
  template BasicTensor<T> resize_nearest<T>(const BasicTensor<T>&, int, int);                    \
  template BasicTensor<T> log_depth_encode<T>(const BasicTensor<T>&, DepthRange);                \
  template BasicTensor<T> log_depth_decode<T>(const BasicTensor<T>&, DepthRange);                \
  template BasicTensor<T> concat_channels<T>(std::span<const BasicTensor<T>* const>);            \
  template BasicTensor<T> slice_channels<T>(const BasicTensor<T>&, int, int);                    \
  template void he_init<T>(std::span<T>, int, std::uint64_t);                                    \
  template class Adam<T>;

MDEPTH_INSTANTIATE_OPS(float)
MDEPTH_INSTANTIATE_OPS(double)

#undef MDEPTH_INSTANTIATE_OPS

}  // namespace mdepth
