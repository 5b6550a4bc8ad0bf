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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "mdepth/checkpoint.hpp"
#include "mdepth/error.hpp"
#include "test_util.hpp"

namespace mdepth {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

NetworkConfig small_config() {
  NetworkConfig cfg;
  cfg.num_levels = 2;
  cfg.encoder_channels = {8, 12};
  cfg.estimator_channels = {16, 16, 16, 12, 8, 4, 1};
  cfg.d_init = 12.5;
  return cfg;
}

TEST(TensorFile, HeaderLayout) {
  TempDir dir("tf");
  write_tensor_file(dir.path() / "t.bin", {{"ab", {2}, {1.0f, -2.0f}}});
  const std::string b = read_bytes(dir.path() / "t.bin");
  // magic, version, count, name length, name, rank, dim, data
  ASSERT_EQ(b.size(), 4u + 4 + 4 + 4 + 2 + 4 + 4 + 8);
  EXPECT_EQ(b.substr(0, 4), "M4DC");
  EXPECT_EQ(static_cast<unsigned char>(b[4]), kCheckpointVersion);
  EXPECT_EQ(b[8], 1);
  EXPECT_EQ(b.substr(16, 2), "ab");
  float v;
  std::memcpy(&v, b.data() + b.size() - 4, 4);
  EXPECT_EQ(v, -2.0f);
}

TEST(TensorFile, RoundTrip) {
  TempDir dir("tf_rt");
  const std::vector<NamedTensor> ts{
      {"x", {2, 3}, {1, 2, 3, 4, 5, 6}}, {"empty", {0}, {}}, {"scalar", {}, {7}}};
  write_tensor_file(dir.path() / "a.bin", ts);
  const auto r = read_tensor_file(dir.path() / "a.bin");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].name, "x");
  EXPECT_EQ(r[0].dims, ts[0].dims);
  EXPECT_EQ(r[0].data, ts[0].data);
  EXPECT_TRUE(r[1].data.empty());
  EXPECT_EQ(r[2].data, std::vector<float>{7});
  EXPECT_THROW(write_tensor_file(dir.path() / "b.bin", {{"bad", {3}, {1}}}), Error);
}

TEST(Checkpoint, ByteExactRoundTrip) {
  TempDir dir("ckpt");
  const DepthNetwork<float> net(small_config(), 7);
  save_checkpoint(dir.path() / "a.ckpt", net);
  const DepthNetwork<float> back = load_checkpoint(dir.path() / "a.ckpt");
  EXPECT_EQ(back.config().to_text(), net.config().to_text());
  ASSERT_EQ(back.params().size(), net.params().size());
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    const auto& p = net.params()[i];
    const auto& q = back.params()[i];
    EXPECT_EQ(p.name, q.name);
    EXPECT_EQ(p.dims, q.dims);
    ASSERT_EQ(std::memcmp(p.value.data(), q.value.data(), p.numel() * sizeof(float)), 0);
  }
  save_checkpoint(dir.path() / "b.ckpt", back);
  EXPECT_EQ(read_bytes(dir.path() / "a.ckpt"), read_bytes(dir.path() / "b.ckpt"));
}

ErrorKind load_error(const fs::path& p) {
  try {
    load_checkpoint(p);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInvalidArgument;
}

TEST(Checkpoint, BadFiles) {
  TempDir dir("ckpt_bad");
  EXPECT_EQ(load_error(dir.path() / "none.ckpt"), ErrorKind::kMissingFile);

  const DepthNetwork<float> net(small_config(), 7);
  save_checkpoint(dir.path() / "good.ckpt", net);
  const std::string good = read_bytes(dir.path() / "good.ckpt");

  std::string magic = good;
  magic[0] = 'X';
  write_bytes(dir.path() / "magic.ckpt", magic);
  EXPECT_EQ(load_error(dir.path() / "magic.ckpt"), ErrorKind::kBadFormat);

  std::string version = good;
  version[4] = 9;
  write_bytes(dir.path() / "version.ckpt", version);
  EXPECT_EQ(load_error(dir.path() / "version.ckpt"), ErrorKind::kBadFormat);

  write_bytes(dir.path() / "short.ckpt", good.substr(0, good.size() - 3));
  EXPECT_EQ(load_error(dir.path() / "short.ckpt"), ErrorKind::kBadFormat);

  // Parameters of a differently shaped network do not fit.
  NetworkConfig other = small_config();
  other.encoder_channels = {8, 16};
  const DepthNetwork<float> wide(other, 7);
  auto tensors = read_tensor_file(dir.path() / "good.ckpt");
  save_checkpoint(dir.path() / "wide.ckpt", wide);
  auto wide_tensors = read_tensor_file(dir.path() / "wide.ckpt");
  wide_tensors[0] = tensors[0];
  write_tensor_file(dir.path() / "mismatch.ckpt", wide_tensors);
  EXPECT_EQ(load_error(dir.path() / "mismatch.ckpt"), ErrorKind::kBadFormat);
}

}  // namespace
}  // namespace mdepth
