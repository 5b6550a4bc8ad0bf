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

#include "mdepth/triangulation.hpp"

#include <algorithm>
#include <cmath>

#include "mdepth/geometric_layers.hpp"

namespace mdepth {

namespace {

double sample_bilinear(const Tensor& t, double i, double j) {
  const int i0 = static_cast<int>(std::floor(i)), j0 = static_cast<int>(std::floor(j));
  const int i1 = std::min(i0 + 1, t.width() - 1), j1 = std::min(j0 + 1, t.height() - 1);
  const double wi = i - i0, wj = j - j0;
  return (1 - wj) * ((1 - wi) * t(j0, i0) + wi * t(j0, i1)) +
         wj * ((1 - wi) * t(j1, i0) + wi * t(j1, i1));
}

// Vertex offset of a parabola through (-1, a), (0, b), (1, c).
double parabola_peak(double a, double b, double c) {
  const double denom = a - 2 * b + c;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

// Per-channel sum over a (2a+1)^2 window, clamped at the borders.
Tensor box_filter(const Tensor& t, int a) {
  if (a <= 0) return t;
  const int h = t.height(), w = t.width(), c = t.channels();
  Tensor rows(h, w, c), out(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float* o = rows.pixel(y, x);
      for (int dx = -a; dx <= a; ++dx) {
        const float* p = t.pixel(y, std::clamp(x + dx, 0, w - 1));
        for (int k = 0; k < c; ++k) o[k] += p[k];
      }
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float* o = out.pixel(y, x);
      for (int dy = -a; dy <= a; ++dy) {
        const float* p = rows.pixel(std::clamp(y + dy, 0, h - 1), x);
        for (int k = 0; k < c; ++k) o[k] += p[k];
      }
    }
  return out;
}

}  // namespace

Tensor triangulate_analytic(const Tensor& f_t, const Tensor& f_prev_warped,
                            const Tensor& d_hypothesis, const RigidTransform& motion,
                            const Intrinsics& k_level, const TriangulationConfig& cfg) {
  if (motion.translation.norm() <= 1e-6) {
    throw Error(ErrorKind::kDegenerateMotion, "triangulation needs a non-zero translation");
  }
  require_shape(f_prev_warped.shape(), f_t.shape(), "triangulation features");
  require_shape(d_hypothesis.shape(), Shape{f_t.height(), f_t.width(), 1}, "depth hypothesis");
  require_reprojection_intrinsics(k_level);
  const int h = f_t.height(), w = f_t.width(), r = cfg.radius, side = 2 * r + 1;
  const Tensor cv = box_filter(cost_volume(f_t, f_prev_warped, r), cfg.aggregate_radius);
  const Reprojector reproject(motion, k_level);
  const Mat3& rot = reproject.rotation();
  const Vec3 b = rot * reproject.translation();
  const double f = reproject.focal(), cx = reproject.cx(), cy = reproject.cy();

  Tensor out = d_hypothesis;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float* c = cv.pixel(y, x);
      int best = cost_volume_channel(0, 0, r);
      for (int ch = 0; ch < side * side; ++ch) {
        if (c[ch] > c[best]) best = ch;
      }
      const int kj = best / side - r, ki = best % side - r;
      if (kj == 0 && ki == 0) continue;
      double oi = ki, oj = kj;
      if (cfg.subpixel) {
        if (std::abs(ki) < r) {
          oi += parabola_peak(c[cost_volume_channel(kj, ki - 1, r)], c[best],
                              c[cost_volume_channel(kj, ki + 1, r)]);
        }
        if (std::abs(kj) < r) {
          oj += parabola_peak(c[cost_volume_channel(kj - 1, ki, r)], c[best],
                              c[cost_volume_channel(kj + 1, ki, r)]);
        }
      }
      const double mi = x + oi, mj = y + oj;
      if (mi < 0 || mi > w - 1 || mj < 0 || mj > h - 1) continue;
      // The warped map at the match came from this location at t-1.
      const auto q = reproject(mi, mj, sample_bilinear(d_hypothesis, mi, mj));
      if (!q) continue;

      const double d0 = d_hypothesis(y, x);
      const Vec3 a = rot * Vec3((x - cx) / f, (y - cy) / f, 1.0);
      if (a.z() > 0.0) {
        const auto at_hyp = reproject(x, y, d0);
        if (at_hyp) {
          const double pi = f * a.x() / a.z() + cx, pj = f * a.y() / a.z() + cy;
          const double parallax = std::hypot(at_hyp->pixel.i - pi, at_hyp->pixel.j - pj);
          if (parallax < cfg.min_parallax_px) continue;
        }
      }
      // (u - cx)(d a_z + b_z) = f (d a_x + b_x), same for v.
      const double du = q->pixel.i - cx, dv = q->pixel.j - cy;
      const double a1 = du * a.z() - f * a.x(), c1 = f * b.x() - du * b.z();
      const double a2 = dv * a.z() - f * a.y(), c2 = f * b.y() - dv * b.z();
      const double denom = a1 * a1 + a2 * a2;
      if (!(denom > 1e-12)) continue;
      const double d = (a1 * c1 + a2 * c2) / denom;
      if (!std::isfinite(d) || d <= 0.0) continue;
      out(y, x) = static_cast<float>(std::clamp(d, cfg.range.min, cfg.range.max));
    }
  }
  return out;
}

Tensor patch_descriptors(const Tensor& image, int radius) {
  const int h = image.height(), w = image.width(), side = 2 * radius + 1;
  Tensor gray(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float* p = image.pixel(y, x);
      double s = 0.0;
      for (int c = 0; c < image.channels(); ++c) s += p[c];
      gray(y, x) = static_cast<float>(s / image.channels());
    }
  }
  Tensor out(h, w, side * side);
  std::vector<double> patch(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double mean = 0.0;
      for (int dy = -radius, n = 0; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx, ++n) {
          const int yy = std::clamp(y + dy, 0, h - 1), xx = std::clamp(x + dx, 0, w - 1);
          patch[n] = gray(yy, xx);
          mean += patch[n];
        }
      }
      mean /= static_cast<double>(patch.size());
      double norm = 0.0;
      for (auto& v : patch) {
        v -= mean;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      float* o = out.pixel(y, x);
      if (norm < 1e-12) continue;
      for (std::size_t n = 0; n < patch.size(); ++n) o[n] = static_cast<float>(patch[n] / norm);
    }
  }
  return out;
}

}  // namespace mdepth
