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

#include "mdepth/camera.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "mdepth/error.hpp"

namespace mdepth {

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, s, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::kInvalidArgument, "image size must be at least 1x1");
  }
  if (!std::isfinite(s) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw Error(ErrorKind::kInvalidArgument, "non-finite intrinsics");
  }
}

Intrinsics Intrinsics::resized(int w, int h) const {
  const double sx = static_cast<double>(w) / width;
  const double sy = static_cast<double>(h) / height;
  Intrinsics out = *this;
  out.fx = fx * sx;
  out.fy = fy * sy;
  out.s = s * sx;
  out.cx = (cx + 0.5) * sx - 0.5;
  out.cy = (cy + 0.5) * sy - 0.5;
  out.width = w;
  out.height = h;
  return out;
}

Intrinsics Intrinsics::at_level(int level) const {
  const int div = 1 << level;
  const double scale = 1.0 / div;
  Intrinsics out = *this;
  out.fx = fx * scale;
  out.fy = fy * scale;
  out.s = s * scale;
  out.cx = (cx + 0.5) * scale - 0.5;
  out.cy = (cy + 0.5) * scale - 0.5;
  out.width = std::max(1, width / div);
  out.height = std::max(1, height / div);
  return out;
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis_angle, const Vec3& translation) {
  RigidTransform t;
  const double angle = axis_angle.norm();
  if (angle > 0.0) t.rotation = Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
  t.translation = translation;
  return t;
}

Vec3 RigidTransform::axis_angle() const {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

bool RigidTransform::is_identity() const {
  return rotation == Mat3::Identity() && translation == Vec3::Zero();
}

// a(b(P)) = Ra (Rb (P + tb) + ta) = Ra Rb (P + tb + Rb^T ta)
RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = b.translation + b.rotation.transpose() * a.translation;
  return out;
}

// Q = R (P + t)  =>  P = R^T (Q - R t)
RigidTransform invert(const RigidTransform& a) {
  RigidTransform out;
  out.rotation = a.rotation.transpose();
  out.translation = -(a.rotation * a.translation);
  return out;
}

RigidTransform orthonormalized(const RigidTransform& a) {
  Eigen::JacobiSVD<Mat3> svd(a.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) = -u.col(2);
    r = u * svd.matrixV().transpose();
  }
  return {r, a.translation};
}

RigidTransform motion_between(const CameraPose& previous, const CameraPose& current) {
  // A pose in transform form maps camera points to world: R (P + R^T p).
  const auto as_transform = [](const CameraPose& pose) {
    const Mat3 r = pose.orientation.normalized().toRotationMatrix();
    return RigidTransform{r, r.transpose() * pose.position};
  };
  return compose(invert(as_transform(previous)), as_transform(current));
}

Projection project(const Vec3& point, const Intrinsics& k) {
  if (!(point.z() > kMinDepthZ)) {
    throw Error(ErrorKind::kNonPositiveDepth, "point is not in front of the camera");
  }
  const Vec3 h = k.matrix() * point;
  return {{h.x() / point.z(), h.y() / point.z()}, point.z()};
}

Vec3 backproject(PixelCoord p, double depth, const Intrinsics& k) {
  if (!(depth > kMinDepthZ)) {
    throw Error(ErrorKind::kNonPositiveDepth, "depth must be positive");
  }
  const double y = (p.j - k.cy) / k.fy;
  const double x = (p.i - k.cx - k.s * y) / k.fx;
  return Vec3(x * depth, y * depth, depth);
}

void require_reprojection_intrinsics(const Intrinsics& k) {
  if (std::abs(k.fx - k.fy) / k.fx >= 1e-6 || k.s != 0.0) {
    throw Error(ErrorKind::kUnsupportedIntrinsics,
                "reprojection requires fx == fy and zero skew");
  }
}

Reprojector::Reprojector(const RigidTransform& motion, const Intrinsics& k)
    : rotation_(motion.rotation),
      translation_(motion.translation),
      f_(k.fx),
      inv_f_(1.0 / k.fx),
      cx_(k.cx),
      cy_(k.cy),
      identity_(motion.is_identity()) {
  require_reprojection_intrinsics(k);
}

Projection reproject_coords(PixelCoord p, double depth, const RigidTransform& motion,
                            const Intrinsics& k) {
  if (!(depth > 0.0)) throw Error(ErrorKind::kNonPositiveDepth, "depth must be positive");
  require_reprojection_intrinsics(k);
  if (motion.is_identity()) return {p, depth};
  const auto out = Reprojector(motion, k)(p.i, p.j, depth);
  if (!out) throw Error(ErrorKind::kBehindCamera, "point is behind the previous camera");
  return *out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Intrinsics read_camera_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream is(line);
  Intrinsics k;
  if (!(is >> k.fx >> k.fy >> k.s >> k.cx >> k.cy >> k.width >> k.height)) {
    throw Error(ErrorKind::kBadFormat, path.string() + ": expected 'fx fy s cx cy width height'");
  }
  k.validate();
  return k;
}

void write_camera_file(const std::filesystem::path& path, const Intrinsics& k) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kMissingFile, "cannot write " + path.string());
  out << format_double(k.fx) << ' ' << format_double(k.fy) << ' ' << format_double(k.s) << ' '
      << format_double(k.cx) << ' ' << format_double(k.cy) << ' ' << k.width << ' ' << k.height
      << '\n';
}

}  // namespace mdepth
