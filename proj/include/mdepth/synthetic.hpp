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

#include <cstdint>
#include <string>

#include "mdepth/camera.hpp"
#include "mdepth/sequence.hpp"

namespace mdepth {

enum class GeometryKind { kPlane, kHeightField, kSprites, kRandom };
enum class TrajectoryKind { kStraight, kArc, kSpline, kRandom };

std::string to_string(GeometryKind k);
std::string to_string(TrajectoryKind k);

// Procedural static scene viewed by a moving pinhole camera. `kRandom` kinds
// are drawn per generated sequence from the generation seed.
struct SceneSpec {
  GeometryKind geometry = GeometryKind::kRandom;
  TrajectoryKind trajectory = TrajectoryKind::kRandom;
  std::uint64_t texture_seed = 0;
  double speed = 3.0;         // m/s
  int frame_count = 8;
  double fps = 6.25;
  double min_distance = 4.0;  // range of the main surface distance, meters
  double max_distance = 30.0;
  double texture_scale = 2.5;  // coarsest texture wavelength at 10 m, meters
  Intrinsics intrinsics{48.0, 48.0, 0.0, 31.5, 31.5, 64, 64};

  void validate() const;
  bool set(const std::string& key, const std::string& value);
  std::string to_text() const;
  static SceneSpec from_text(const std::string& text);

  // Named presets: "toy" (64x64, 4 frames), "default" (64x64, 8 frames),
  // "plane" (textured plane, straight lateral motion).
  static SceneSpec preset(const std::string& name);
};

// Renders every frame by exact ray casting; depth is the camera-z distance of
// the nearest hit, RGB is an 8-bit quantized world-space value-noise albedo.
// Deterministic in (spec, seed). Throws DegenerateSpec when a view leaves the
// scene or depths fall outside [0.1, 200] m.
SequenceSample generate_synthetic(const SceneSpec& spec, std::uint64_t seed);

// A textured plane at `distance` facing the camera, with the camera moving by
// `step` (camera frame of the first view) each frame. Rotation-free.
SequenceSample generate_plane_sequence(const Intrinsics& k, double distance, const Vec3& step,
                                       int frame_count, std::uint64_t seed,
                                       double texture_scale = 2.5);

}  // namespace mdepth
