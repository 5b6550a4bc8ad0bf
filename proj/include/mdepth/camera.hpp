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
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mdepth {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Points closer than this along the optical axis are treated as degenerate.
inline constexpr double kMinDepthZ = 1e-6;

// Pinhole intrinsics in pixels. Integer pixel coordinates address pixel
// centers, so the center of a W-wide image is at (W - 1) / 2.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double s = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Mat3 matrix() const;

  // Throws Error(kInvalidArgument) if fx, fy <= 0 or the image is empty.
  void validate() const;

  // Intrinsics of the same camera resampled to `w` x `h` pixels.
  Intrinsics resized(int w, int h) const;

  // Intrinsics at pyramid level `level` (size divided by 2^level).
  Intrinsics at_level(int level) const;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

struct PixelCoord {
  double i = 0.0;  // horizontal
  double j = 0.0;  // vertical
};

struct Projection {
  PixelCoord pixel;
  double depth = 0.0;
};

// Frame-to-frame camera motion. Maps a point expressed in the current camera
// frame to the previous camera frame as  P_prev = R (P_cur + t).
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_axis_angle(const Vec3& axis_angle, const Vec3& translation);

  Vec3 apply(const Vec3& p) const { return rotation * (p + translation); }

  // Rotation as an axis-angle vector (radians).
  Vec3 axis_angle() const;

  bool is_identity() const;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);  // a after b
RigidTransform invert(const RigidTransform& a);

// Projects the rotation back onto SO(3) (SVD), keeping the translation.
RigidTransform orthonormalized(const RigidTransform& a);

// Absolute camera pose in a world frame: X_world = orientation * X_cam + position.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

// Motion taking points from the `current` camera frame to the `previous` one.
RigidTransform motion_between(const CameraPose& previous, const CameraPose& current);

Projection project(const Vec3& point, const Intrinsics& k);
Vec3 backproject(PixelCoord p, double depth, const Intrinsics& k);

// Coordinates and depth at t-1 of the point seen at `p` with depth `depth` at
// t. Requires fx == fy (relative 1e-6) and zero skew.
Projection reproject_coords(PixelCoord p, double depth, const RigidTransform& motion,
                            const Intrinsics& k);

// Precomputed form of reproject_coords for per-pixel loops. Does not throw
// per call; returns nullopt where the point lands behind the previous camera.
class Reprojector {
 public:
  Reprojector(const RigidTransform& motion, const Intrinsics& k);

  std::optional<Projection> operator()(double i, double j, double depth) const {
    if (identity_) return Projection{{i, j}, depth};
    const Vec3 ray((i - cx_) * inv_f_, (j - cy_) * inv_f_, 1.0);
    const Vec3 prev = rotation_ * (ray * depth + translation_);
    if (!(prev.z() > kMinDepthZ)) return std::nullopt;
    return Projection{{f_ * prev.x() / prev.z() + cx_, f_ * prev.y() / prev.z() + cy_},
                      prev.z()};
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  double focal() const { return f_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

 private:
  Mat3 rotation_;
  Vec3 translation_;
  double f_, inv_f_, cx_, cy_;
  bool identity_;
};

void require_reprojection_intrinsics(const Intrinsics& k);

// camera.txt: one line "fx fy s cx cy width height".
Intrinsics read_camera_file(const std::filesystem::path& path);
void write_camera_file(const std::filesystem::path& path, const Intrinsics& k);

}  // namespace mdepth
