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

#include "mdepth/gradcheck.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "mdepth/geometric_layers.hpp"
#include "mdepth/ops.hpp"
#include "mdepth/trainer.hpp"

namespace mdepth {

namespace {

using Clock = std::chrono::steady_clock;

double rel_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

TensorD random_tensor(std::mt19937_64& rng, int h, int w, int c, double lo = -1.0,
                      double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  TensorD t(h, w, c);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

double dot(const TensorD& a, const TensorD& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Compares `analytic` against central differences of `objective` for every
// entry of `x`, updating `r`.
void compare_all(std::span<double> x, std::span<const double> analytic,
                 const std::function<double()>& objective, double h, GradcheckResult& r) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = objective();
    x[i] = orig - h;
    const double down = objective();
    x[i] = orig;
    r.max_rel_error = std::max(r.max_rel_error, rel_error(analytic[i], (up - down) / (2 * h)));
    ++r.checked;
  }
}

GradcheckResult start(std::string name, double tol) {
  GradcheckResult r;
  r.name = std::move(name);
  r.tolerance = tol;
  return r;
}

void finish(GradcheckResult& r, Clock::time_point t0) {
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

const std::vector<std::string>& gradcheck_suites() {
  static const std::vector<std::string> names{"conv3x3", "leaky_relu", "resize_bilinear",
                                              "cost_volume", "warp", "network"};
  return names;
}

GradcheckResult gradcheck_conv3x3(std::uint64_t seed, int height, int width, int cin, int cout,
                                  int stride) {
  const auto t0 = Clock::now();
  auto r = start("conv3x3", kLayerTolerance);
  std::mt19937_64 rng(seed);
  const ConvGeometry g{cin, cout, stride};
  TensorD x = random_tensor(rng, height, width, cin);
  TensorD w = random_tensor(rng, 1, 1, 9 * cin * cout);
  TensorD b = random_tensor(rng, 1, 1, cout);
  const TensorD probe = random_tensor(rng, (height + stride - 1) / stride,
                                      (width + stride - 1) / stride, cout);
  const auto objective = [&] {
    return dot(probe, conv3x3_forward<double>(x, w.values(), b.values(), g));
  };
  TensorD gw(w.shape()), gb(b.shape());
  const TensorD gx = conv3x3_backward<double>(x, w.values(), probe, g, gw.values(), gb.values());
  compare_all(x.values(), gx.values(), objective, kLayerStep, r);
  compare_all(w.values(), gw.values(), objective, kLayerStep, r);
  compare_all(b.values(), gb.values(), objective, kLayerStep, r);
  finish(r, t0);
  return r;
}

GradcheckResult gradcheck_leaky_relu(std::uint64_t seed, int height, int width, int channels) {
  const auto t0 = Clock::now();
  auto r = start("leaky_relu", kLayerTolerance);
  std::mt19937_64 rng(seed);
  TensorD x = random_tensor(rng, height, width, channels);
  // Keep inputs away from the kink so the central difference stays on one side.
  for (auto& v : x.values()) {
    if (std::abs(v) < 10 * kLayerStep) v += v < 0 ? -0.05 : 0.05;
  }
  const TensorD probe = random_tensor(rng, height, width, channels);
  const auto objective = [&] { return dot(probe, leaky_relu<double>(x, 0.1)); };
  const TensorD gx = leaky_relu_backward<double>(x, probe, 0.1);
  compare_all(x.values(), gx.values(), objective, kLayerStep, r);
  finish(r, t0);
  return r;
}

GradcheckResult gradcheck_resize_bilinear(std::uint64_t seed, int height, int width, int channels,
                                          int out_height, int out_width) {
  const auto t0 = Clock::now();
  auto r = start("resize_bilinear", kLayerTolerance);
  std::mt19937_64 rng(seed);
  TensorD x = random_tensor(rng, height, width, channels);
  const TensorD probe = random_tensor(rng, out_height, out_width, channels);
  const auto objective = [&] { return dot(probe, resize_bilinear<double>(x, out_height, out_width)); };
  const TensorD gx = resize_bilinear_backward<double>(probe, x.shape());
  compare_all(x.values(), gx.values(), objective, kLayerStep, r);
  finish(r, t0);
  return r;
}

GradcheckResult gradcheck_cost_volume(std::uint64_t seed, int height, int width, int channels,
                                      int radius) {
  const auto t0 = Clock::now();
  auto r = start("cost_volume", kLayerTolerance);
  std::mt19937_64 rng(seed);
  TensorD f1 = random_tensor(rng, height, width, channels);
  TensorD f2 = random_tensor(rng, height, width, channels);
  const int side = 2 * radius + 1;
  const TensorD probe = random_tensor(rng, height, width, side * side);
  const auto objective = [&] { return dot(probe, cost_volume<double>(f1, f2, radius)); };
  const auto grads = cost_volume_backward<double>(f1, f2, radius, probe);
  compare_all(f1.values(), grads.f1.values(), objective, kLayerStep, r);
  compare_all(f2.values(), grads.f2.values(), objective, kLayerStep, r);
  finish(r, t0);
  return r;
}

GradcheckResult gradcheck_warp(std::uint64_t seed, int height, int width, int channels,
                               bool transform_depth_values) {
  const auto t0 = Clock::now();
  auto r = start(transform_depth_values ? "warp(depth values)" : "warp", kLayerTolerance);
  std::mt19937_64 rng(seed);
  const int c = transform_depth_values ? 1 : channels;
  TensorD source = transform_depth_values ? random_tensor(rng, height, width, 1, 4.0, 12.0)
                                          : random_tensor(rng, height, width, c);
  const TensorD depth = random_tensor(rng, height, width, 1, 4.0, 12.0);
  const double f = 0.75 * width;
  const Intrinsics k{f, f, 0.0, (width - 1) / 2.0, (height - 1) / 2.0, width, height};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RigidTransform motion = RigidTransform::from_axis_angle(
      Vec3(0.02 * u(rng), 0.02 * u(rng), 0.02 * u(rng)),
      Vec3(0.4 * u(rng), 0.4 * u(rng), 0.4 * u(rng)));
  const TensorD probe = random_tensor(rng, height, width, c);
  const auto objective = [&] {
    return dot(probe, warp<double>(source, depth, motion, k, transform_depth_values).warped);
  };
  const auto grads = warp_backward<double>(source, depth, motion, k, transform_depth_values, probe);
  compare_all(source.values(), grads.source.values(), objective, kLayerStep, r);
  finish(r, t0);
  return r;
}

GradcheckResult gradcheck_network(std::uint64_t seed, int samples_per_tensor) {
  const auto t0 = Clock::now();
  auto r = start("network", kNetworkTolerance);
  constexpr int kSize = 32;
  constexpr int kFrames = 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Smooth synthetic clip with a translating, slightly rotating camera.
  SequenceSample clip;
  clip.id = "gradcheck";
  clip.intrinsics = Intrinsics{24.0, 24.0, 0.0, 15.5, 15.5, kSize, kSize};
  const double phase = 6.28 * u(rng);
  for (int t = 0; t < kFrames; ++t) {
    Frame fr;
    fr.rgb = Tensor(kSize, kSize, 3);
    fr.depth = Tensor(kSize, kSize, 1);
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        for (int c = 0; c < 3; ++c) {
          fr.rgb(y, x, c) =
              static_cast<float>(0.5 + 0.4 * std::sin(0.3 * x + 0.2 * y * (c + 1) + 0.5 * t + phase));
        }
        fr.depth(y, x) = static_cast<float>(8.0 + 3.0 * std::sin(0.1 * x + 0.15 * y + phase));
      }
    }
    fr.motion = t == 0 ? RigidTransform::identity()
                       : RigidTransform::from_axis_angle(Vec3(0.01, -0.02, 0.005),
                                                         Vec3(0.3, 0.1, 0.4));
    clip.frames.push_back(std::move(fr));
  }

  NetworkConfig cfg;
  cfg.num_levels = 2;
  cfg.d_init = 10.0;
  DepthNetwork<double> net(cfg, seed);
  auto grads = net.make_param_grads();
  std::vector<FrozenGeometry> geometry;
  clip_loss<double>(net, clip, {}, {}, &grads, &geometry);
  const auto objective = [&] { return clip_loss<double>(net, clip, {}, {}, nullptr, &geometry); };

  std::normal_distribution<double> nd;
  const double h = kNetworkStep;
  for (std::size_t p = 0; p < net.params().size(); ++p) {
    auto values = net.params()[p].value.values();
    const auto g = grads[p].values();
    // One random unit direction through the whole tensor.
    std::vector<double> dir(values.size());
    double norm = 0.0;
    for (auto& d : dir) {
      d = nd(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    double analytic = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      dir[i] /= norm;
      analytic += dir[i] * g[i];
    }
    const std::vector<double> orig(values.begin(), values.end());
    for (std::size_t i = 0; i < dir.size(); ++i) values[i] = orig[i] + h * dir[i];
    const double up = objective();
    for (std::size_t i = 0; i < dir.size(); ++i) values[i] = orig[i] - h * dir[i];
    const double down = objective();
    std::copy(orig.begin(), orig.end(), values.begin());
    r.max_rel_error = std::max(r.max_rel_error, rel_error(analytic, (up - down) / (2 * h)));
    ++r.checked;
    // A few single entries.
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    for (int s = 0; s < samples_per_tensor; ++s) {
      const std::size_t i = pick(rng);
      values[i] = orig[i] + h;
      const double e_up = objective();
      values[i] = orig[i] - h;
      const double e_down = objective();
      values[i] = orig[i];
      const double numeric = (e_up - e_down) / (2 * h);
      // Entries with vanishing gradients are compared on an absolute scale.
      const double err = std::abs(g[i] - numeric) /
                         std::max({std::abs(g[i]), std::abs(numeric), 1e-4});
      r.max_rel_error = std::max(r.max_rel_error, err);
      ++r.checked;
    }
  }
  finish(r, t0);
  return r;
}

std::vector<GradcheckResult> run_gradcheck(const std::string& only, std::uint64_t seed) {
  std::vector<GradcheckResult> out;
  const auto want = [&](const char* name) { return only.empty() || only == name; };
  if (want("conv3x3")) {
    out.push_back(gradcheck_conv3x3(seed, 6, 6, 3, 4, 1));
    auto strided = gradcheck_conv3x3(seed + 1, 7, 6, 3, 2, 2);
    strided.name = "conv3x3(stride 2)";
    out.push_back(strided);
  }
  if (want("leaky_relu")) out.push_back(gradcheck_leaky_relu(seed, 6, 6, 3));
  if (want("resize_bilinear")) out.push_back(gradcheck_resize_bilinear(seed, 4, 5, 2, 8, 10));
  if (want("cost_volume")) out.push_back(gradcheck_cost_volume(seed, 6, 6, 3, 2));
  if (want("warp")) {
    out.push_back(gradcheck_warp(seed, 8, 8, 3, false));
    out.push_back(gradcheck_warp(seed, 8, 8, 1, true));
  }
  if (want("network")) out.push_back(gradcheck_network(seed));
  return out;
}

}  // namespace mdepth
