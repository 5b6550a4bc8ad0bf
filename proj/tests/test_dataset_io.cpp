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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "mdepth/dataset.hpp"
#include "mdepth/error.hpp"
#include "mdepth/image_io.hpp"
#include "mdepth/synthetic.hpp"
#include "test_util.hpp"

namespace mdepth {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mdepth::Error thrown";
  return ErrorKind::kInvalidArgument;
}

// Random walk of camera poses with small rotations.
std::vector<CameraPose> random_walk(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<CameraPose> poses(n);
  for (int t = 1; t < n; ++t) {
    const Vec3 aa(0.05 * g(rng), 0.05 * g(rng), 0.05 * g(rng));
    const Eigen::Quaterniond dq(Eigen::AngleAxisd(aa.norm(), aa.normalized()));
    poses[t].orientation = (poses[t - 1].orientation * dq).normalized();
    poses[t].position = poses[t - 1].position + Vec3(g(rng), 0.3 * g(rng), 0.5 * g(rng));
  }
  return poses;
}

SequenceSample tiny_sequence(int n, std::uint64_t seed) {
  SequenceSample s;
  s.id = "tiny";
  s.intrinsics = Intrinsics{4.0, 4.0, 0.0, 1.5, 1.5, 4, 4};
  const auto poses = random_walk(n, seed);
  for (int t = 0; t < n; ++t) {
    Frame f;
    f.rgb = Tensor(4, 4, 3);
    f.rgb.fill(static_cast<float>(t % 256) / 255.0f);
    f.depth = Tensor(4, 4, 1);
    f.depth.fill(static_cast<float>(t + 1));
    f.pose = poses[t];
    f.motion = t == 0 ? RigidTransform::identity() : motion_between(poses[t - 1], poses[t]);
    s.frames.push_back(std::move(f));
  }
  return s;
}

TEST(Pfm, RoundTripIsBitExact) {
  TempDir dir("pfm");
  Tensor d = testing::random_tensor<float>(7, 5, 1, 11, 0.1, 150.0);
  d(0, 0, 0) = 1e-30f;
  write_pfm(dir.path() / "a.pfm", d);
  const Tensor r = read_pfm(dir.path() / "a.pfm");
  ASSERT_EQ(r.shape(), d.shape());
  EXPECT_EQ(std::memcmp(r.data(), d.data(), d.size() * sizeof(float)), 0);
  write_pfm(dir.path() / "b.pfm", r);
  EXPECT_EQ(read_bytes(dir.path() / "a.pfm"), read_bytes(dir.path() / "b.pfm"));
}

TEST(Pfm, RejectsBadFiles) {
  TempDir dir("pfm_bad");
  EXPECT_EQ(kind_of([&] { read_pfm(dir.path() / "none.pfm"); }), ErrorKind::kMissingFile);
  std::ofstream(dir.path() / "color.pfm") << "PF\n2 2\n-1.0\n";
  EXPECT_EQ(kind_of([&] { read_pfm(dir.path() / "color.pfm"); }), ErrorKind::kBadFormat);
  std::ofstream(dir.path() / "short.pfm") << "Pf\n2 2\n-1.0\nabc";
  EXPECT_EQ(kind_of([&] { read_pfm(dir.path() / "short.pfm"); }), ErrorKind::kBadFormat);
}

TEST(Png, QuantizedImageRoundTrips) {
  TempDir dir("png");
  Tensor rgb = testing::random_tensor<float>(6, 9, 3, 12, 0.0, 1.0);
  quantize_8bit(rgb);
  write_png_rgb(dir.path() / "a.png", rgb);
  const Tensor r = read_png_rgb(dir.path() / "a.png");
  ASSERT_EQ(r.shape(), rgb.shape());
  for (std::size_t i = 0; i < r.size(); ++i) ASSERT_EQ(r[i], rgb[i]);
  EXPECT_EQ(kind_of([&] { read_png_rgb(dir.path() / "none.png"); }), ErrorKind::kMissingFile);
}

TEST(Dataset, SaveLoadRoundTrip) {
  TempDir dir("ds");
  SceneSpec spec = SceneSpec::preset("default");
  const SequenceSample s = generate_synthetic(spec, 77);
  save_sequence(dir.path() / "seq_a", s);
  const SequenceSample r = load_sequence(dir.path() / "seq_a");
  EXPECT_EQ(r.id, "seq_a");
  EXPECT_EQ(r.intrinsics, s.intrinsics);
  ASSERT_EQ(r.size(), 8u);
  EXPECT_TRUE(r.frames[0].motion.is_identity());
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto& a = s.frames[t];
    const auto& b = r.frames[t];
    ASSERT_EQ(std::memcmp(a.depth.data(), b.depth.data(), a.depth.size() * sizeof(float)), 0);
    for (std::size_t i = 0; i < a.rgb.size(); ++i) ASSERT_EQ(a.rgb[i], b.rgb[i]);
    EXPECT_LT((a.motion.rotation - b.motion.rotation).norm(), 1e-9);
    EXPECT_LT((a.motion.translation - b.motion.translation).norm(), 1e-9);
  }
}

TEST(Dataset, PosesAreSynthesizedFromMotions) {
  TempDir dir("ds_motion");
  SequenceSample s = tiny_sequence(5, 3);
  for (auto& f : s.frames) f.pose.reset();
  save_sequence(dir.path() / "s", s);
  const SequenceSample r = load_sequence(dir.path() / "s");
  for (std::size_t t = 1; t < s.size(); ++t) {
    EXPECT_LT((r.frames[t].motion.rotation - s.frames[t].motion.rotation).norm(), 1e-9);
    EXPECT_LT((r.frames[t].motion.translation - s.frames[t].motion.translation).norm(), 1e-9);
  }
}

TEST(Dataset, ReaderListsSequencesInOrder) {
  TempDir dir("ds_reader");
  SequenceSample s = tiny_sequence(3, 4);
  for (const char* id : {"b", "a", "c"}) {
    s.id = id;
    save_sequence(dir.path() / id, s);
  }
  fs::create_directories(dir.path() / "not_a_sequence");
  const auto all = load_dataset(dir.path());
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].id, "a");
  EXPECT_EQ(all[2].id, "c");
  DatasetReader reader(dir.path());
  SequenceSample x;
  int n = 0;
  while (reader.next(x)) ++n;
  EXPECT_EQ(n, 3);
  reader.rewind();
  EXPECT_TRUE(reader.next(x));
}

TEST(Dataset, Errors) {
  TempDir dir("ds_err");
  const SequenceSample s = tiny_sequence(3, 5);
  save_sequence(dir.path() / "s", s);
  EXPECT_EQ(kind_of([&] { load_sequence(dir.path() / "missing"); }), ErrorKind::kMissingFile);

  fs::remove(dir.path() / "s" / "rgb" / "000002.png");
  EXPECT_EQ(kind_of([&] { load_sequence(dir.path() / "s"); }), ErrorKind::kPoseCountMismatch);

  save_sequence(dir.path() / "s", s);
  Tensor bad = s.frames[1].depth;
  bad[3] = std::nanf("");
  write_pfm(dir.path() / "s" / "depth" / "000001.pfm", bad);
  EXPECT_EQ(kind_of([&] { load_sequence(dir.path() / "s"); }), ErrorKind::kCorruptDepth);
  bad[3] = 0.0f;
  write_pfm(dir.path() / "s" / "depth" / "000001.pfm", bad);
  EXPECT_EQ(kind_of([&] { load_sequence(dir.path() / "s"); }), ErrorKind::kCorruptDepth);

  std::ofstream(dir.path() / "p.csv") << "0,1,2\n";
  EXPECT_EQ(kind_of([&] { read_poses(dir.path() / "p.csv"); }), ErrorKind::kBadFormat);
}

TEST(Poses, CsvRoundTrip) {
  TempDir dir("poses");
  const auto poses = random_walk(6, 9);
  write_poses(dir.path() / "p.csv", poses);
  const auto r = read_poses(dir.path() / "p.csv");
  ASSERT_EQ(r.size(), poses.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].position, poses[i].position);
    EXPECT_EQ(r[i].orientation.coeffs(), poses[i].orientation.coeffs());
  }
}

TEST(Poses, AdvanceInvertsMotionBetween) {
  const auto poses = random_walk(10, 21);
  for (int t = 1; t < 10; ++t) {
    const CameraPose p = advance_pose(poses[t - 1], motion_between(poses[t - 1], poses[t]));
    EXPECT_LT((p.position - poses[t].position).norm(), 1e-9);
    EXPECT_LT(p.orientation.angularDistance(poses[t].orientation), 1e-9);
  }
}

TEST(Preprocess, SixtySevenFramesGiveTwoClips) {
  const SequenceSample s = tiny_sequence(67, 6);
  PreprocessConfig cfg;
  cfg.out_size = 0;
  const auto clips = preprocess(s, cfg);
  ASSERT_EQ(clips.size(), 2u);
  for (const auto& c : clips) {
    EXPECT_EQ(c.size(), 8u);
    EXPECT_TRUE(c.frames[0].motion.is_identity());
  }
  // frame k of the kept stream is original frame 4k
  EXPECT_EQ(clips[0].frames[1].depth[0], 5.0f);
  EXPECT_EQ(clips[1].frames[0].depth[0], 33.0f);
}

TEST(Preprocess, IdentitySplit) {
  const SequenceSample s = tiny_sequence(9, 7);
  PreprocessConfig cfg{1, 9, 0};
  const auto clips = preprocess(s, cfg);
  ASSERT_EQ(clips.size(), 1u);
  ASSERT_EQ(clips[0].size(), 9u);
  for (std::size_t t = 0; t < 9; ++t) {
    EXPECT_EQ(clips[0].frames[t].depth[0], s.frames[t].depth[0]);
    EXPECT_EQ(clips[0].frames[t].motion.translation, s.frames[t].motion.translation);
  }
}

TEST(Preprocess, ComposedMotionMatchesPoseDifference) {
  const SequenceSample s = tiny_sequence(17, 8);
  PreprocessConfig cfg{4, 4, 0};
  const auto clips = preprocess(s, cfg);
  ASSERT_EQ(clips.size(), 1u);
  for (std::size_t k = 1; k < 4; ++k) {
    const RigidTransform direct = motion_between(*s.frames[4 * (k - 1)].pose, *s.frames[4 * k].pose);
    const RigidTransform& m = clips[0].frames[k].motion;
    EXPECT_LT((m.rotation - direct.rotation).norm(), 1e-6);
    EXPECT_LT((m.translation - direct.translation).norm(), 1e-6);
  }
}

TEST(Preprocess, ResizesImagesAndIntrinsics) {
  const SequenceSample s = tiny_sequence(8, 9);
  PreprocessConfig cfg{2, 2, 8};
  const auto clips = preprocess(s, cfg);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[0].intrinsics.width, 8);
  EXPECT_DOUBLE_EQ(clips[0].intrinsics.fx, 8.0);
  EXPECT_EQ(clips[0].frames[0].rgb.height(), 8);
  EXPECT_EQ(clips[0].frames[1].depth.width(), 8);
  EXPECT_THROW(preprocess(s, PreprocessConfig{0, 2, 8}), Error);
}

TEST(Split, DivisibleByThreeIsTest) {
  const auto [train, test] = split_midair_style({0, 1, 2, 3, 4, 5});
  EXPECT_EQ(test, (std::vector<int>{0, 3}));
  EXPECT_EQ(train, (std::vector<int>{1, 2, 4, 5}));
  const auto [tr2, te2] = split_midair_style({});
  EXPECT_TRUE(tr2.empty());
  EXPECT_TRUE(te2.empty());
  EXPECT_EQ(split_midair_style({3000}).second, (std::vector<int>{3000}));
  EXPECT_THROW(split_midair_style({-1}), Error);
}

}  // namespace
}  // namespace mdepth
