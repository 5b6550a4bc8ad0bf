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

#include <optional>
#include <string>
#include <vector>

#include "mdepth/camera.hpp"
#include "mdepth/tensor.hpp"

namespace mdepth {

struct Frame {
  Tensor rgb;    // H x W x 3, intensities in [0, 1]
  Tensor depth;  // H x W x 1, meters along the camera z axis
  RigidTransform motion;  // from the previous frame; identity for the first
  std::optional<CameraPose> pose;  // absolute pose when known
};

// An ordered clip of frames sharing one camera.
struct SequenceSample {
  std::string id;
  Intrinsics intrinsics;
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }

  // Frames [begin, begin + count); the first kept frame's motion is reset to
  // identity since its predecessor is no longer part of the clip.
  SequenceSample slice(std::size_t begin, std::size_t count) const;

  // Throws if the invariants (identity first motion, positive depths, frame
  // sizes matching the intrinsics) do not hold.
  void validate() const;
};

}  // namespace mdepth
