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

#include "mdepth/sequence.hpp"

#include <cmath>

namespace mdepth {

SequenceSample SequenceSample::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > frames.size()) {
    throw Error(ErrorKind::kInvalidArgument, "sequence slice out of range");
  }
  SequenceSample out{id, intrinsics, {}};
  out.frames.assign(frames.begin() + static_cast<std::ptrdiff_t>(begin),
                    frames.begin() + static_cast<std::ptrdiff_t>(begin + count));
  if (!out.frames.empty()) out.frames.front().motion = RigidTransform::identity();
  return out;
}

void SequenceSample::validate() const {
  intrinsics.validate();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Frame& f = frames[t];
    require_shape(f.rgb.shape(), Shape{intrinsics.height, intrinsics.width, 3}, "frame rgb");
    require_shape(f.depth.shape(), Shape{intrinsics.height, intrinsics.width, 1}, "frame depth");
    for (float d : f.depth.values()) {
      if (!(d > 0.0f) || !std::isfinite(d)) {
        throw Error(ErrorKind::kCorruptDepth, id + ": frame " + std::to_string(t));
      }
    }
  }
  if (!frames.empty() && !frames.front().motion.is_identity()) {
    throw Error(ErrorKind::kInvalidArgument, id + ": first frame motion must be identity");
  }
}

}  // namespace mdepth
