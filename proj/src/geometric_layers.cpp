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

#include "mdepth/geometric_layers.hpp"

#include <cmath>

namespace mdepth {

template <typename T>
WarpPlan::WarpPlan(const BasicTensor<T>& depth_t, const RigidTransform& motion,
                   const Intrinsics& k)
    : height_(depth_t.height()), width_(depth_t.width()) {
  if (depth_t.channels() != 1) {
    throw Error(ErrorKind::kShapeMismatch, "warp depth map must have one channel");
  }
  const Reprojector reproject(motion, k);
  const Vec3 z_row = motion.rotation.col(2);
  depth_offset_ = -motion.translation.z();
  const bool identity = motion.is_identity();
  samples_.resize(static_cast<std::size_t>(height_) * width_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      Sample& s = samples_[static_cast<std::size_t>(y) * width_ + x];
      s = Sample{0, 0, 0, 0, 0.0, 0.0, 1.0, false};
      const double d = static_cast<double>(depth_t(y, x));
      if (!(d > 0.0)) continue;
      const auto prev = reproject(x, y, d);
      if (!prev) continue;
      const double pi = prev->pixel.i;
      const double pj = prev->pixel.j;
      if (!(pi >= 0.0 && pi <= width_ - 1 && pj >= 0.0 && pj <= height_ - 1)) continue;
      s.i0 = static_cast<int>(std::floor(pi));
      s.j0 = static_cast<int>(std::floor(pj));
      s.i1 = std::min(s.i0 + 1, width_ - 1);
      s.j1 = std::min(s.j0 + 1, height_ - 1);
      s.wi = pi - s.i0;
      s.wj = pj - s.j0;
      if (!identity) {
        const Vec3 ray((pi - reproject.cx()) / reproject.focal(),
                       (pj - reproject.cy()) / reproject.focal(), 1.0);
        s.depth_gain = z_row.dot(ray);
      }
      s.in_frame = true;
    }
  }
}

template <typename T>
BasicWarpResult<T> WarpPlan::apply(const BasicTensor<T>& source,
                                   bool transform_depth_values) const {
  if (source.height() != height_ || source.width() != width_) {
    throw Error(ErrorKind::kShapeMismatch, "warp source and depth sizes differ: " +
                                               to_string(source.shape()));
  }
  if (transform_depth_values && source.channels() != 1) {
    throw Error(ErrorKind::kShapeMismatch, "depth-value warping needs a single-channel source");
  }
  const int c = source.channels();
  BasicWarpResult<T> out{BasicTensor<T>(source.shape()), BasicTensor<T>(height_, width_, 1)};
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Sample& s = samples_[static_cast<std::size_t>(y) * width_ + x];
      if (!s.in_frame) continue;
      const T wi1 = static_cast<T>(s.wi), wi0 = T(1) - wi1;
      const T wj1 = static_cast<T>(s.wj), wj0 = T(1) - wj1;
      const T* p00 = source.pixel(s.j0, s.i0);
      const T* p01 = source.pixel(s.j0, s.i1);
      const T* p10 = source.pixel(s.j1, s.i0);
      const T* p11 = source.pixel(s.j1, s.i1);
      T* dst = out.warped.pixel(y, x);
      for (int ch = 0; ch < c; ++ch) {
        dst[ch] = wj0 * (wi0 * p00[ch] + wi1 * p01[ch]) + wj1 * (wi0 * p10[ch] + wi1 * p11[ch]);
      }
      if (transform_depth_values) {
        const double z = s.depth_gain * static_cast<double>(dst[0]) + depth_offset_;
        if (!(z > kMinDepthZ)) {
          dst[0] = T(0);
          continue;
        }
        dst[0] = static_cast<T>(z);
      }
      out.validity(y, x) = T(1);
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> WarpPlan::backward(const BasicTensor<T>& grad_warped, const BasicTensor<T>& validity,
                                  const Shape& source_shape, bool transform_depth_values) const {
  require_shape(grad_warped.shape(), source_shape, "warp backward gradient");
  require_shape(validity.shape(), Shape{height_, width_, 1}, "warp backward validity");
  const int c = source_shape.channels;
  BasicTensor<T> grad(source_shape);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (validity(y, x) == T(0)) continue;
      const Sample& s = samples_[static_cast<std::size_t>(y) * width_ + x];
      const T wi1 = static_cast<T>(s.wi), wi0 = T(1) - wi1;
      const T wj1 = static_cast<T>(s.wj), wj0 = T(1) - wj1;
      const T gain = transform_depth_values ? static_cast<T>(s.depth_gain) : T(1);
      const T* g = grad_warped.pixel(y, x);
      T* p00 = grad.pixel(s.j0, s.i0);
      T* p01 = grad.pixel(s.j0, s.i1);
      T* p10 = grad.pixel(s.j1, s.i0);
      T* p11 = grad.pixel(s.j1, s.i1);
      for (int ch = 0; ch < c; ++ch) {
        const T gv = g[ch] * gain;
        p00[ch] += wj0 * wi0 * gv;
        p01[ch] += wj0 * wi1 * gv;
        p10[ch] += wj1 * wi0 * gv;
        p11[ch] += wj1 * wi1 * gv;
      }
    }
  }
  return grad;
}

template <typename T>
BasicWarpResult<T> warp(const BasicTensor<T>& source_prev, const BasicTensor<T>& depth_t,
                        const RigidTransform& motion, const Intrinsics& k,
                        bool transform_depth_values) {
  if (source_prev.height() != depth_t.height() || source_prev.width() != depth_t.width()) {
    throw Error(ErrorKind::kShapeMismatch, "warp source " + to_string(source_prev.shape()) +
                                               " vs depth " + to_string(depth_t.shape()));
  }
  return WarpPlan(depth_t, motion, k).apply(source_prev, transform_depth_values);
}

template <typename T>
BasicWarpGradients<T> warp_backward(const BasicTensor<T>& source_prev,
                                    const BasicTensor<T>& depth_t, const RigidTransform& motion,
                                    const Intrinsics& k, bool transform_depth_values,
                                    const BasicTensor<T>& grad_warped) {
  const WarpPlan plan(depth_t, motion, k);
  const auto fwd = plan.apply(source_prev, transform_depth_values);
  return {plan.backward(grad_warped, fwd.validity, source_prev.shape(), transform_depth_values),
          BasicTensor<T>(depth_t.shape())};
}

namespace {

template <typename T>
double cost_impl(std::span<const T> x1, std::span<const T> x2) {
  if (x1.size() != x2.size() || x1.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "cost vectors must have equal, non-zero length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    acc += static_cast<double>(x1[i]) * static_cast<double>(x2[i]);
  }
  return acc / static_cast<double>(x1.size());
}

}  // namespace

double cost(std::span<const float> x1, std::span<const float> x2) { return cost_impl(x1, x2); }
double cost(std::span<const double> x1, std::span<const double> x2) { return cost_impl(x1, x2); }

template <typename T>
BasicTensor<T> cost_volume(const BasicTensor<T>& f1, const BasicTensor<T>& f2, int r) {
  require_shape(f2.shape(), f1.shape(), "cost_volume");
  if (r < 0) throw Error(ErrorKind::kInvalidArgument, "cost_volume radius must be >= 0");
  const int h = f1.height(), w = f1.width(), len = f1.channels();
  if (len < 1) throw Error(ErrorKind::kLengthMismatch, "cost_volume needs at least one channel");
  const int side = 2 * r + 1;
  BasicTensor<T> out(h, w, side * side);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const T* a = f1.pixel(y, x);
      T* dst = out.pixel(y, x);
      for (int kj = -r; kj <= r; ++kj) {
        const int yy = y + kj;
        if (yy < 0 || yy >= h) continue;
        for (int ki = -r; ki <= r; ++ki) {
          const int xx = x + ki;
          if (xx < 0 || xx >= w) continue;
          const T* b = f2.pixel(yy, xx);
          double acc = 0.0;
          for (int c = 0; c < len; ++c) acc += static_cast<double>(a[c]) * static_cast<double>(b[c]);
          dst[cost_volume_channel(kj, ki, r)] = static_cast<T>(acc / len);
        }
      }
    }
  }
  return out;
}

template <typename T>
CostVolumeGradients<T> cost_volume_backward(const BasicTensor<T>& f1, const BasicTensor<T>& f2,
                                            int r, const BasicTensor<T>& grad_output) {
  require_shape(f2.shape(), f1.shape(), "cost_volume_backward");
  const int h = f1.height(), w = f1.width(), len = f1.channels();
  const int side = 2 * r + 1;
  require_shape(grad_output.shape(), Shape{h, w, side * side}, "cost_volume_backward gradient");
  CostVolumeGradients<T> g{BasicTensor<T>(f1.shape()), BasicTensor<T>(f2.shape())};
  const T inv_len = T(1) / static_cast<T>(len);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const T* a = f1.pixel(y, x);
      T* ga = g.f1.pixel(y, x);
      const T* go = grad_output.pixel(y, x);
      for (int kj = -r; kj <= r; ++kj) {
        const int yy = y + kj;
        if (yy < 0 || yy >= h) continue;
        for (int ki = -r; ki <= r; ++ki) {
          const int xx = x + ki;
          if (xx < 0 || xx >= w) continue;
          const T scale = go[cost_volume_channel(kj, ki, r)] * inv_len;
          if (scale == T(0)) continue;
          const T* b = f2.pixel(yy, xx);
          T* gb = g.f2.pixel(yy, xx);
          for (int c = 0; c < len; ++c) {
            ga[c] += scale * b[c];
            gb[c] += scale * a[c];
          }
        }
      }
    }
  }
  return g;
}

#define MDEPTH_INSTANTIATE_GEOM(T)                                                                \
  template WarpPlan::WarpPlan(const BasicTensor<T>&, const RigidTransform&, const Intrinsics&);  \
  template BasicWarpResult<T> WarpPlan::apply<T>(const BasicTensor<T>&, bool) const;             \
  template BasicTensor<T> WarpPlan::backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,    \
                                                const Shape&, bool) const;                       \
  template BasicWarpResult<T> warp<T>(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                      const RigidTransform&, const Intrinsics&, bool);           \
  template BasicWarpGradients<T> warp_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,  \
                                                  const RigidTransform&, const Intrinsics&, bool, \
                                                  const BasicTensor<T>&);                        \
  template BasicTensor<T> cost_volume<T>(const BasicTensor<T>&, const BasicTensor<T>&, int);     \
  template CostVolumeGradients<T> cost_volume_backward<T>(                                       \
      const BasicTensor<T>&, const BasicTensor<T>&, int, const BasicTensor<T>&);

MDEPTH_INSTANTIATE_GEOM(float)
MDEPTH_INSTANTIATE_GEOM(double)

#undef MDEPTH_INSTANTIATE_GEOM

}  // namespace mdepth
