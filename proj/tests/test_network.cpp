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

#include "mdepth/error.hpp"
#include "mdepth/geometric_layers.hpp"
#include "mdepth/network.hpp"
#include "mdepth/ops.hpp"
#include "mdepth/synthetic.hpp"
#include "test_util.hpp"

namespace mdepth {
namespace {

NetworkConfig small_config(int levels = 2) {
  NetworkConfig cfg;
  cfg.num_levels = levels;
  cfg.encoder_channels = {8, 12, 16};
  cfg.estimator_channels = {16, 16, 16, 12, 8, 4, 1};
  cfg.d_init = 10.0;
  return cfg;
}

double max_log_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(std::log(static_cast<double>(a[i])) - std::log(static_cast<double>(b[i]))));
  }
  return m;
}

TEST(NetworkConfig, TextRoundTrip) {
  NetworkConfig cfg = small_config(3);
  cfg.leaky_slope = 0.2;
  cfg.transform_warped_depth = false;
  cfg.depth_range = {0.5, 80.0};
  const auto back = NetworkConfig::from_text(cfg.to_text());
  EXPECT_EQ(back.to_text(), cfg.to_text());
  EXPECT_EQ(back.encoder_channels, cfg.encoder_channels);
  EXPECT_EQ(back.leaky_slope, 0.2);
  EXPECT_FALSE(back.transform_warped_depth);
  EXPECT_THROW(NetworkConfig::from_text("bogus=1\n"), Error);
}

TEST(NetworkConfig, ValidationAndDefaults) {
  NetworkConfig cfg;
  EXPECT_EQ(cfg.estimator_channels, (std::vector<int>{128, 128, 128, 96, 64, 32, 1}));
  EXPECT_EQ(cfg.cost_radius, 4);
  EXPECT_EQ(cfg.leaky_slope, 0.1);
  EXPECT_EQ(cfg.encoder_channels, (std::vector<int>{16, 32, 64, 96, 128, 192}));
  EXPECT_EQ(cfg.estimator_input_channels(0), 16 + 81 + 1 + 1 + 2 + 6);
  EXPECT_EQ(cfg.estimator_input_channels(2), 64 + 81 + 1 + 1 + 2 + 6);
  cfg.num_levels = 7;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.num_levels = 2;
  cfg.estimator_channels.back() = 2;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Network, ParameterLayout) {
  const DepthNetwork<float> net(small_config(2), 1);
  const auto& p = net.params();
  ASSERT_EQ(p.size(), 2u * (2 * 2 + 7 * 2));
  EXPECT_EQ(p[0].name, "encoder.1.conv0.weight");
  EXPECT_EQ(p[0].dims, (std::vector<int>{3, 3, 3, 8}));
  EXPECT_EQ(p[3].name, "encoder.1.conv1.bias");
  EXPECT_EQ(p[8].name, "estimator.1.conv0.weight");
  EXPECT_EQ(p[8].dims[2], 8 + 81 + 10);
  EXPECT_EQ(p.back().name, "estimator.2.conv6.bias");
  // The final bias starts at the log prior.
  EXPECT_FLOAT_EQ(p.back().value[0], std::log(10.0f));
  for (const auto& t : p) EXPECT_EQ(t.is_bias, t.name.ends_with(".bias"));
}

TEST(Network, EncoderShapes) {
  NetworkConfig cfg;
  cfg.num_levels = 6;
  const DepthNetwork<float> net(cfg, 1);
  const auto feats = net.encode(Tensor(384, 384, 3, 0.5f));
  ASSERT_EQ(feats.size(), 6u);
  EXPECT_EQ(feats[0].shape(), (Shape{192, 192, 16}));
  EXPECT_EQ(feats[5].shape(), (Shape{6, 6, 192}));
  NetworkConfig one = cfg;
  one.num_levels = 1;
  EXPECT_EQ(DepthNetwork<float>(one, 1).encode(Tensor(384, 384, 3)).at(0).shape(),
            (Shape{192, 192, 16}));
  EXPECT_THROW(net.encode(Tensor(100, 100, 3)), Error);
}

TEST(Network, ZeroImageWithZeroBiasGivesZeroFeatures) {
  DepthNetwork<float> net(small_config(2), 3);
  for (auto& p : net.params())
    if (p.is_bias) p.value.fill(0.0f);
  for (const auto& f : net.encode(Tensor(16, 16, 3, 0.0f)))
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], 0.0f);
}

TEST(Network, FirstStepSelfPairing) {
  const auto cfg = small_config(2);
  const DepthNetwork<float> net(cfg, 2);
  const auto image = testing::random_tensor<float>(32, 32, 3, 5, 0.0, 1.0);
  const auto feats = net.encode(image);
  const Intrinsics k{24.0, 24.0, 0.0, 15.5, 15.5, 32, 32};
  const int c = cfg.encoder_channels[0];
  BasicLevelState<float> fallback{feats[0], Tensor(16, 16, 1, 10.0f)};
  const Tensor up_log(16, 16, 1, std::log(10.0f));
  const auto input =
      net.preprocess_level(0, feats[0], fallback, up_log, RigidTransform::identity(), k.at_level(1));
  EXPECT_EQ(input.channels(), cfg.estimator_input_channels(0));
  EXPECT_EQ(slice_channels<float>(input, c, 81), cost_volume<float>(feats[0], feats[0], 4));
  EXPECT_EQ(slice_channels<float>(input, 0, c), feats[0]);
  const auto dw = slice_channels<float>(input, c + 81, 1);
  for (std::size_t i = 0; i < dw.size(); ++i) EXPECT_FLOAT_EQ(dw[i], std::log(10.0f));
  const auto grid = slice_channels<float>(input, c + 83, 2);
  EXPECT_FLOAT_EQ(grid(0, 0, 0), -1.0f);
  EXPECT_FLOAT_EQ(grid(15, 15, 1), 1.0f);
}

TEST(Network, OutputsArePositiveAndFullSize) {
  const auto seq = generate_synthetic(SceneSpec::preset("toy"), 4);
  const auto cfg = small_config(2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DepthNetwork<float> net(cfg, seed);
    auto state = net.initial_state();
    const auto out = net.step(seq.frames[0].rgb, seq.frames[0].motion, seq.intrinsics, state);
    ASSERT_EQ(out.depth.shape(), (Shape{64, 64, 1}));
    ASSERT_EQ(out.level_depths.size(), 2u);
    EXPECT_EQ(out.level_depths[0].shape(), (Shape{32, 32, 1}));
    EXPECT_EQ(out.level_depths[1].shape(), (Shape{16, 16, 1}));
    for (std::size_t i = 0; i < out.depth.size(); ++i) {
      ASSERT_GE(out.depth[i], cfg.depth_range.min);
      ASSERT_LE(out.depth[i], cfg.depth_range.max);
    }
    EXPECT_EQ(state.timestep, 1);
    EXPECT_EQ(state.levels.size(), 2u);
  }
}

TEST(Network, StepRejectsBadInputs) {
  const DepthNetwork<float> net(small_config(2), 1);
  auto state = net.initial_state();
  const Intrinsics k{48.0, 48.0, 0.0, 31.5, 31.5, 64, 64};
  EXPECT_THROW(net.step(Tensor(62, 64, 3), RigidTransform::identity(), k, state), Error);
  EXPECT_THROW(net.step(Tensor(64, 64, 1), RigidTransform::identity(), k, state), Error);
  EXPECT_THROW(net.step(Tensor(32, 32, 3), RigidTransform::identity(), k, state), Error);
}

// With a static camera the recurrence is a contraction towards a fixed point.
TEST(Network, StaticSceneConvergesToFixedPoint) {
  const auto seq = generate_synthetic(SceneSpec::preset("toy"), 3);
  NetworkConfig cfg;
  cfg.num_levels = 2;
  cfg.d_init = 10.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const DepthNetwork<float> net(cfg, seed);
    auto state = net.initial_state();
    std::vector<Tensor> outs;
    for (int t = 0; t < 8; ++t) {
      outs.push_back(
          net.step(seq.frames[0].rgb, RigidTransform::identity(), seq.intrinsics, state).depth);
    }
    double previous = 1e9;
    for (int t = 2; t < 8; ++t) {
      const double d = max_log_diff(outs[t], outs[t - 1]);
      EXPECT_LT(d, previous) << "seed " << seed << " step " << t;
      previous = d;
    }
    EXPECT_LT(previous, 1e-4) << "seed " << seed;
  }
}

TEST(Network, InferenceIsOnline) {
  const auto seq = generate_synthetic(SceneSpec::preset("default"), 8);
  const DepthNetwork<float> net(small_config(2), 6);
  const auto full = net.infer_sequence(seq);
  ASSERT_EQ(full.size(), 8u);
  for (std::size_t k : {1u, 3u, 5u}) {
    const auto prefix = net.infer_sequence(seq.slice(0, k));
    ASSERT_EQ(prefix.size(), k);
    for (std::size_t t = 0; t < k; ++t) EXPECT_EQ(prefix[t], full[t]) << "k=" << k << " t=" << t;
  }
}

TEST(Network, DeterministicForSeed) {
  const auto seq = generate_synthetic(SceneSpec::preset("toy"), 9);
  const auto a = DepthNetwork<float>(small_config(2), 17).infer_sequence(seq);
  const auto b = DepthNetwork<float>(small_config(2), 17).infer_sequence(seq);
  const auto c = DepthNetwork<float>(small_config(2), 18).infer_sequence(seq);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.back(), c.back());
}

TEST(Network, FloatAndDoubleAgree) {
  const auto seq = generate_synthetic(SceneSpec::preset("toy"), 10);
  const auto f = DepthNetwork<float>(small_config(2), 4).infer_sequence(seq);
  const auto d = DepthNetwork<double>(small_config(2), 4).infer_sequence(seq);
  for (std::size_t t = 0; t < f.size(); ++t)
    for (std::size_t i = 0; i < f[t].size(); ++i)
      EXPECT_NEAR(std::log(f[t][i]), std::log(d[t][i]), 1e-3);
}

}  // namespace
}  // namespace mdepth
