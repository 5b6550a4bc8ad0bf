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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace mdepth {
namespace {

using testing::TempDir;

// Runs the CLI through the shell; returns its exit status and stdout.
int run_cli(const std::string& args, std::string* out = nullptr, const TempDir* dir = nullptr) {
  std::string cmd = std::string("\"") + MDEPTH_CLI_PATH + "\" " + args;
  std::filesystem::path capture;
  if (dir) {
    capture = dir->path() / "stdout.txt";
    cmd += " > \"" + capture.string() + "\"";
  }
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (out && dir) {
    std::ifstream in(capture);
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  EXPECT_EQ(run_cli("train"), 2);
  EXPECT_EQ(run_cli("gradcheck --module nope"), 2);
  EXPECT_EQ(run_cli(""), 2);
}

TEST(Cli, RuntimeErrorsExitOne) {
  TempDir dir("cli_err");
  EXPECT_EQ(run_cli("eval --ckpt oracle --data \"" + (dir.path() / "missing").string() + "\""), 1);
}

TEST(Cli, SynthThenEvaluateOracle) {
  TempDir dir("cli_synth");
  const auto data = dir.path() / "data";
  ASSERT_EQ(run_cli("synth --spec toy --count 2 --set size=32 --out \"" + data.string() + "\""), 0);
  EXPECT_TRUE(std::filesystem::exists(data / "scene_spec.txt"));
  std::string out;
  ASSERT_EQ(run_cli("eval --ckpt oracle --seq-len 1,2 --data \"" + data.string() + "\"", &out, &dir),
            0);
  EXPECT_NE(out.find("seq_len,abs_rel"), std::string::npos);
  EXPECT_NE(out.find("1,0,0,0,0,1,1,1"), std::string::npos) << out;
}

TEST(Cli, GradcheckSingleSuitePasses) {
  EXPECT_EQ(run_cli("gradcheck --module leaky_relu"), 0);
}

}  // namespace
}  // namespace mdepth
