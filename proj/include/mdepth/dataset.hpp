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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mdepth/sequence.hpp"

namespace mdepth {

// On-disk layout of one sequence directory:
//   camera.txt            fx fy s cx cy width height
//   poses.csv             frame_index,px,py,pz,qw,qx,qy,qz (camera-to-world)
//   rgb/%06d.png          8-bit RGB
//   depth/%06d.pfm        z-depth in meters
std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& root);
SequenceSample load_sequence(const std::filesystem::path& dir);

// Lazily loads the sequences under `root` in lexicographic order.
class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& root);

  std::size_t size() const { return dirs_.size(); }
  bool next(SequenceSample& out);
  void rewind() { cursor_ = 0; }

 private:
  std::vector<std::filesystem::path> dirs_;
  std::size_t cursor_ = 0;
};

std::vector<SequenceSample> load_dataset(const std::filesystem::path& root);

// Frames without an absolute pose get one by chaining motions from the
// identity pose.
void save_sequence(const std::filesystem::path& dir, const SequenceSample& sample);
void save_dataset(const std::filesystem::path& root, const std::vector<SequenceSample>& samples);

std::vector<CameraPose> read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const std::vector<CameraPose>& poses);

// Pose at t from the pose at t-1 and the motion between them.
CameraPose advance_pose(const CameraPose& previous, const RigidTransform& motion);

struct PreprocessConfig {
  int subsample = 4;
  int clip_len = 8;
  int out_size = 384;  // square output side; 0 keeps the input size
};

// Keeps frames 0, s, 2s, ... of every complete group of `subsample` frames,
// composes the skipped motions, cuts non-overlapping clips (dropping the
// remainder) and resizes RGB bilinearly and depth by nearest neighbor.
std::vector<SequenceSample> preprocess(const SequenceSample& sample,
                                       const PreprocessConfig& cfg = {});

// Ids divisible by 3 go to the test split.
std::pair<std::vector<int>, std::vector<int>> split_midair_style(const std::vector<int>& ids);

}  // namespace mdepth
