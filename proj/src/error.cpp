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

#include "mdepth/error.hpp"

namespace mdepth {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::kBehindCamera: return "BehindCamera";
    case ErrorKind::kUnsupportedIntrinsics: return "UnsupportedIntrinsics";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kEmptyMask: return "EmptyMask";
    case ErrorKind::kDegenerateMotion: return "DegenerateMotion";
    case ErrorKind::kDegenerateSpec: return "DegenerateSpec";
    case ErrorKind::kMissingFile: return "MissingFile";
    case ErrorKind::kPoseCountMismatch: return "PoseCountMismatch";
    case ErrorKind::kCorruptDepth: return "CorruptDepth";
    case ErrorKind::kBadFormat: return "BadFormat";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace mdepth
