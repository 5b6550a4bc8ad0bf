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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdepth/error.hpp"
#include "mdepth/geometric_layers.hpp"
#include "mdepth/gradcheck.hpp"
#include "mdepth/ops.hpp"
#include "mdepth/synthetic.hpp"
#include "mdepth/triangulation.hpp"
#include "test_util.hpp"

namespace mdepth {
namespace {

using testing::random_tensor;

const Intrinsics kCam{48.0, 48.0, 0.0, 31.5, 31.5, 64, 64};

double interior_mae(const Tensor& a, const Tensor& b, const Tensor& valid, int margin) {
  double sum = 0;
  long n = 0;
  for (int y = margin; y < a.height() - margin; ++y)
    for (int x = margin; x < a.width() - margin; ++x) {
      if (valid(y, x) == 0.0f) continue;
      for (int c = 0; c < a.channels(); ++c) sum += std::abs(a(y, x, c) - b(y, x, c));
      n += a.channels();
    }
  return n ? sum / n : 1e9;
}

TEST(Warp, IdentityMotionIsExact) {
  const auto src = random_tensor<float>(9, 11, 3, 1);
  const Tensor depth(9, 11, 1, 4.0f);
  const auto r = warp<float>(src, depth, RigidTransform::identity(), kCam, false);
  EXPECT_EQ(r.warped, src);
  for (std::size_t i = 0; i < r.validity.size(); ++i) EXPECT_EQ(r.validity[i], 1.0f);
}

TEST(Warp, PlaneShiftMatchesRendering) {
  // f * delta / d = 48 * 0.625 / 10 = 3 px: the bilinear taps land on pixel centers.
  const auto seq = generate_plane_sequence(kCam, 10.0, Vec3(0.625, 0, 0), 2, 3);
  const auto& prev = seq.frames[0];
  const auto& cur = seq.frames[1];
  const auto p = reproject_coords({20, 20}, 10.0, cur.motion, kCam);
  EXPECT_NEAR(p.pixel.i - 20.0, 3.0, 1e-9);
  const auto r = warp<float>(prev.rgb, cur.depth, cur.motion, kCam, false);
  EXPECT_LT(interior_mae(r.warped, cur.rgb, r.validity, 2), 1e-3);
  // Pixels whose source falls past the right edge are invalid and zero.
  EXPECT_EQ(r.validity(10, 63), 0.0f);
  EXPECT_EQ(r.warped(10, 63, 0), 0.0f);
}

TEST(Warp, FractionalPlaneShift) {
  const auto seq = generate_plane_sequence(kCam, 10.0, Vec3(0.41, 0.13, 0), 2, 5);
  const auto r = warp<float>(seq.frames[0].rgb, seq.frames[1].depth, seq.frames[1].motion, kCam,
                             false);
  EXPECT_LT(interior_mae(r.warped, seq.frames[1].rgb, r.validity, 2), 1e-2);
}

TEST(Warp, DepthValuesExpressedInCurrentFrame) {
  // Camera moves 1 m forward towards a fronto-parallel plane at 10 m.
  const auto seq = generate_plane_sequence(kCam, 10.0, Vec3(0, 0, 1.0), 2, 7);
  const auto r = warp<float>(seq.frames[0].depth, seq.frames[1].depth, seq.frames[1].motion, kCam,
                             true);
  for (int y = 16; y < 48; ++y)
    for (int x = 16; x < 48; ++x) {
      ASSERT_EQ(r.validity(y, x), 1.0f);
      EXPECT_NEAR(r.warped(y, x), 9.0f, 1e-4);
    }
  const auto raw = warp<float>(seq.frames[0].depth, seq.frames[1].depth, seq.frames[1].motion,
                               kCam, false);
  EXPECT_NEAR(raw.warped(32, 32), 10.0f, 1e-4);
}

TEST(Warp, DepthGradientIsZeroButDepthMatters) {
  const auto src = random_tensor<double>(8, 8, 2, 3);
  TensorD depth(8, 8, 1, 5.0);
  const auto motion = RigidTransform::from_axis_angle(Vec3(0.01, -0.02, 0.0), Vec3(0.3, 0.1, 0.0));
  const Intrinsics k{8.0, 8.0, 0.0, 3.5, 3.5, 8, 8};
  const auto g = random_tensor<double>(8, 8, 2, 4);
  const auto grads = warp_backward<double>(src, depth, motion, k, false, g);
  for (std::size_t i = 0; i < grads.depth.size(); ++i) EXPECT_EQ(grads.depth[i], 0.0);
  EXPECT_EQ(grads.depth.shape(), depth.shape());
  const auto base = warp<double>(src, depth, motion, k, false).warped;
  depth(4, 4) += 1e-3;
  const auto moved = warp<double>(src, depth, motion, k, false).warped;
  double diff = 0;
  for (std::size_t i = 0; i < base.size(); ++i) diff += std::abs(base[i] - moved[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(Warp, SourceGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1, 2, 3}) {
    for (bool transform : {false, true}) {
      const auto r = gradcheck_warp(seed, 7, 9, transform ? 1 : 3, transform);
      EXPECT_TRUE(r.passed()) << r.name << " " << r.max_rel_error;
    }
  }
}

TEST(Warp, RejectsMismatchedShapes) {
  const auto src = random_tensor<float>(8, 8, 1, 1);
  EXPECT_THROW(warp<float>(src, Tensor(8, 7, 1, 1.0f), RigidTransform::identity(), kCam, false),
               Error);
  EXPECT_THROW(warp<float>(src, Tensor(8, 8, 2, 1.0f), RigidTransform::identity(), kCam, false),
               Error);
}

TEST(Cost, HandValues) {
  const float a[] = {1, 0, 0, 0};
  EXPECT_DOUBLE_EQ(cost(std::span<const float>(a), std::span<const float>(a)), 0.25);
  const double b[] = {2, 0}, c[] = {0, 3};
  EXPECT_DOUBLE_EQ(cost(std::span<const double>(b), std::span<const double>(b)), 2.0);
  EXPECT_DOUBLE_EQ(cost(std::span<const double>(b), std::span<const double>(c)), 0.0);
  EXPECT_THROW(cost(std::span<const double>(b), std::span<const double>(c, c + 1)), Error);
}

TEST(CostVolume, ShapeAndChannelOrder) {
  const auto f1 = random_tensor<float>(8, 8, 16, 1), f2 = random_tensor<float>(8, 8, 16, 2);
  const auto cv = cost_volume<float>(f1, f2, 4);
  EXPECT_EQ(cv.shape(), (Shape{8, 8, 81}));
  EXPECT_EQ(cost_volume_channel(-4, -4, 4), 0);
  EXPECT_EQ(cost_volume_channel(0, 0, 4), 40);
  EXPECT_EQ(cost_volume_channel(-4, -3, 4), 1);  // horizontal offset varies fastest
  const double want = cost(std::span<const float>(f1.pixel(3, 3), 16),
                           std::span<const float>(f2.pixel(2, 5), 16));
  EXPECT_FLOAT_EQ(cv(3, 3, cost_volume_channel(-1, 2, 4)), static_cast<float>(want));
  EXPECT_EQ(cv(0, 0, cost_volume_channel(-1, 0, 4)), 0.0f);  // above the frame
}

TEST(CostVolume, RadiusZeroIsPointwiseCost) {
  const auto f1 = random_tensor<float>(5, 6, 3, 1), f2 = random_tensor<float>(5, 6, 3, 2);
  const auto cv = cost_volume<float>(f1, f2, 0);
  ASSERT_EQ(cv.channels(), 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x)
      EXPECT_EQ(cv(y, x), static_cast<float>(cost(std::span<const float>(f1.pixel(y, x), 3),
                                                   std::span<const float>(f2.pixel(y, x), 3))));
}

TEST(CostVolume, SelfCorrelationPeaksAtCenter) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Unit-norm random vectors: the self-correlation is the unique maximum.
    auto f = random_tensor<float>(12, 12, 8, seed);
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 12; ++x) {
        float* p = f.pixel(y, x);
        double n = 0;
        for (int c = 0; c < 8; ++c) n += p[c] * p[c];
        for (int c = 0; c < 8; ++c) p[c] = static_cast<float>(p[c] / std::sqrt(n));
      }
    const auto cv = cost_volume<float>(f, f, 1);
    for (int y = 1; y < 11; ++y)
      for (int x = 1; x < 11; ++x) {
        const float* c = cv.pixel(y, x);
        const int best = static_cast<int>(std::max_element(c, c + 9) - c);
        EXPECT_EQ(best, 4);
      }
  }
}

TEST(CostVolume, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = gradcheck_cost_volume(seed, 5, 6, 3, 2);
    EXPECT_TRUE(r.passed()) << r.max_rel_error;
  }
  EXPECT_THROW(cost_volume<float>(Tensor(4, 4, 2), Tensor(4, 5, 2), 1), Error);
}

// A match at offset k on level l spans k * 2^l input pixels.
TEST(CostVolume, OffsetScalesWithPyramidLevel) {
  // f * delta / d = 48 * 1.6667 / 10 = 8 px per frame at full resolution.
  const auto seq = generate_plane_sequence(kCam, 10.0, Vec3(10.0 / 6.0, 0, 0), 2, 11, 5.0);
  for (int level = 1; level <= 3; ++level) {
    const int s = 64 >> level;
    const auto cur = patch_descriptors(resize_bilinear<float>(seq.frames[1].rgb, s, s), 1);
    const auto prev = patch_descriptors(resize_bilinear<float>(seq.frames[0].rgb, s, s), 1);
    const auto cv = cost_volume<float>(cur, prev, 4);
    const int expected = cost_volume_channel(0, 8 >> level, 4);
    int hits = 0, total = 0;
    for (int y = 2; y < s - 2; ++y)
      for (int x = 2; x < s - 2 - (8 >> level); ++x) {
        const float* c = cv.pixel(y, x);
        hits += static_cast<int>(std::max_element(c, c + 81) - c) == expected;
        ++total;
      }
    EXPECT_GT(hits, 0.9 * total) << "level " << level;
  }
}

}  // namespace
}  // namespace mdepth
