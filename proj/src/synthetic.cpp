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

#include "mdepth/synthetic.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "mdepth/image_io.hpp"
#include "mdepth/ops.hpp"

namespace mdepth {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Lattice value noise in [-1, 1] with quintic fade (C2 continuous).
class ValueNoise {
 public:
  explicit ValueNoise(std::uint64_t seed) : seed_(mix64(seed)) {}

  double operator()(double x, double y, double z) const {
    const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
    const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy),
               iz = static_cast<std::int64_t>(fz);
    const double u = fade(x - fx), v = fade(y - fy), w = fade(z - fz);
    double acc[2][2];
    for (int dz = 0; dz < 2; ++dz) {
      for (int dy = 0; dy < 2; ++dy) {
        const double a = lattice(ix, iy + dy, iz + dz), b = lattice(ix + 1, iy + dy, iz + dz);
        acc[dz][dy] = a + u * (b - a);
      }
    }
    const double p = acc[0][0] + v * (acc[0][1] - acc[0][0]);
    const double q = acc[1][0] + v * (acc[1][1] - acc[1][0]);
    return p + w * (q - p);
  }

 private:
  static double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

  double lattice(std::int64_t x, std::int64_t y, std::int64_t z) const {
    std::uint64_t h = seed_;
    h = mix64(h ^ static_cast<std::uint64_t>(x));
    h = mix64(h ^ static_cast<std::uint64_t>(y));
    h = mix64(h ^ static_cast<std::uint64_t>(z));
    return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
  }

  std::uint64_t seed_;
};

struct Plane {
  Vec3 point;
  Vec3 normal;
};

struct Sphere {
  Vec3 center;
  double radius;
};

struct HeightField {
  double base;       // world z of the mean surface
  double amplitude;  // meters
  double scale;      // lateral feature size, meters
  ValueNoise noise;
  double operator()(double x, double y) const {
    return base + amplitude * noise(x / scale, y / scale, 0.5);
  }
};

struct Scene {
  std::vector<Plane> planes;
  std::vector<Sphere> spheres;
  std::optional<HeightField> height_field;
  ValueNoise texture[3]{ValueNoise(0), ValueNoise(0), ValueNoise(0)};
  double wavelength = 2.5;

  // Nearest positive ray parameter, if any.
  std::optional<double> intersect(const Vec3& o, const Vec3& d) const {
    std::optional<double> best;
    const auto consider = [&](double s) {
      if (s > 1e-6 && (!best || s < *best)) best = s;
    };
    for (const auto& p : planes) {
      const double den = p.normal.dot(d);
      if (std::abs(den) > 1e-12) consider(p.normal.dot(p.point - o) / den);
    }
    for (const auto& sp : spheres) {
      const Vec3 oc = o - sp.center;
      const double b = oc.dot(d), c = oc.squaredNorm() - sp.radius * sp.radius;
      const double a = d.squaredNorm();
      const double disc = b * b - a * c;
      if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        const double s0 = (-b - root) / a;
        consider(s0 > 1e-6 ? s0 : (-b + root) / a);
      }
    }
    if (height_field) {
      // March until the ray passes behind the surface, then bisect.
      const auto g = [&](double s) {
        const Vec3 p = o + s * d;
        return p.z() - (*height_field)(p.x(), p.y());
      };
      const double limit = best ? *best : 400.0;
      const double step = 0.02 * height_field->base;
      double s0 = 0.0, g0 = g(0.0);
      if (g0 < 0.0) {
        for (double s1 = step; s1 <= limit; s1 += step) {
          const double g1 = g(s1);
          if (g1 >= 0.0) {
            double lo = s0, hi = s1;
            for (int it = 0; it < 60; ++it) {
              const double mid = 0.5 * (lo + hi);
              (g(mid) < 0.0 ? lo : hi) = mid;
            }
            consider(0.5 * (lo + hi));
            break;
          }
          s0 = s1;
          g0 = g1;
        }
      }
    }
    return best;
  }

  void shade(const Vec3& p, float* rgb) const {
    const Vec3 q = p / wavelength;
    for (int c = 0; c < 3; ++c) {
      const double n = 0.65 * texture[c](q.x(), q.y(), q.z()) +
                       0.35 * texture[c](2.0 * q.x() + 17.3, 2.0 * q.y() - 5.1, 2.0 * q.z() + 9.7);
      rgb[c] = static_cast<float>(std::clamp(0.5 + 0.4 * n, 0.0, 1.0));
    }
  }
};

void render(const Scene& scene, const CameraPose& pose, const Intrinsics& k, Frame& frame) {
  const Mat3 r = pose.orientation.normalized().toRotationMatrix();
  frame.rgb = Tensor(k.height, k.width, 3);
  frame.depth = Tensor(k.height, k.width, 1);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3 ray_cam = backproject(PixelCoord{static_cast<double>(x), static_cast<double>(y)},
                                       1.0, k);
      const Vec3 d = r * ray_cam;
      const auto s = scene.intersect(pose.position, d);
      if (!s || !(*s > 0.1) || !(*s < 200.0)) {
        throw Error(ErrorKind::kDegenerateSpec,
                    "view ray leaves the scene or depth is outside [0.1, 200] m");
      }
      // ray_cam has unit z, so the ray parameter is the camera-z depth.
      frame.depth(y, x) = static_cast<float>(*s);
      scene.shade(pose.position + *s * d, frame.rgb.pixel(y, x));
    }
  }
  quantize_8bit(frame.rgb);
}

Eigen::Quaterniond euler(double roll, double pitch, double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitY()) *
                            Eigen::AngleAxisd(pitch, Vec3::UnitX()) *
                            Eigen::AngleAxisd(roll, Vec3::UnitZ()));
}

// Catmull-Rom interpolation of a scalar or vector sequence.
template <typename V>
V catmull_rom(const V& p0, const V& p1, const V& p2, const V& p3, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

std::vector<CameraPose> make_trajectory(TrajectoryKind kind, const SceneSpec& spec,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = spec.frame_count;
  const double dt = 1.0 / spec.fps;
  std::vector<CameraPose> poses(n);
  switch (kind) {
    case TrajectoryKind::kStraight: {
      const Vec3 dir = Vec3(u(rng), 0.3 * u(rng), 0.4 * u(rng)).normalized();
      const Eigen::Quaterniond q = euler(0.0, 0.03 * u(rng), 0.08 * u(rng));
      for (int t = 0; t < n; ++t) {
        poses[t].position = dir * spec.speed * dt * t;
        poses[t].orientation = q;
      }
      break;
    }
    case TrajectoryKind::kArc: {
      const double radius = 8.0 + 12.0 * (0.5 + 0.5 * u(rng));
      const double sign = u(rng) < 0.0 ? -1.0 : 1.0;
      const double omega = spec.speed / radius;
      for (int t = 0; t < n; ++t) {
        const double th = omega * dt * t;
        poses[t].position = Vec3(sign * radius * std::sin(th), 0.0, radius * (1.0 - std::cos(th)));
        poses[t].orientation = euler(0.0, 0.0, -0.5 * sign * th);
      }
      break;
    }
    case TrajectoryKind::kSpline:
    case TrajectoryKind::kRandom: {
      // Control points one second apart, mostly lateral, plus small attitude changes.
      const int m = static_cast<int>(std::ceil(n * dt)) + 3;
      std::vector<Vec3> pos(m);
      std::vector<Vec3> att(m);
      pos[0] = Vec3::Zero();
      for (int i = 0; i < m; ++i) {
        if (i > 0) pos[i] = pos[i - 1] + spec.speed * Vec3(u(rng), 0.4 * u(rng), 0.3 * u(rng)).normalized();
        att[i] = Vec3(0.05 * u(rng), 0.05 * u(rng), 0.08 * u(rng));
      }
      for (int t = 0; t < n; ++t) {
        const double time = t * dt;
        const int i = static_cast<int>(std::floor(time)) + 1;
        const double f = time - std::floor(time);
        const Vec3 p = catmull_rom(pos[i - 1], pos[i], pos[i + 1], pos[i + 2], f);
        const Vec3 a = catmull_rom(att[i - 1], att[i], att[i + 1], att[i + 2], f);
        poses[t].position = p;
        poses[t].orientation = euler(a.x(), a.y(), a.z());
      }
      // Start at the origin.
      const Vec3 origin = poses[0].position;
      for (auto& p : poses) p.position -= origin;
      break;
    }
  }
  return poses;
}

Scene make_scene(GeometryKind kind, const SceneSpec& spec, std::uint64_t seed,
                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Scene scene;
  const double distance =
      std::exp(std::log(spec.min_distance) +
               u01(rng) * (std::log(spec.max_distance) - std::log(spec.min_distance)));
  const std::uint64_t tex = mix64(spec.texture_seed ^ mix64(seed));
  for (int c = 0; c < 3; ++c) scene.texture[c] = ValueNoise(tex + static_cast<std::uint64_t>(c));
  scene.wavelength = spec.texture_scale * distance / 10.0;
  switch (kind) {
    case GeometryKind::kPlane:
    case GeometryKind::kRandom: {
      const double tilt = 0.6 * u01(rng), azimuth = 2.0 * kPi * u01(rng);
      const Vec3 normal(std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth),
                        -std::cos(tilt));
      scene.planes.push_back({Vec3(0.0, 0.0, distance), normal});
      break;
    }
    case GeometryKind::kHeightField:
      scene.height_field = HeightField{distance, 0.3 * distance, 0.5 * distance,
                                       ValueNoise(mix64(seed + 11))};
      break;
    case GeometryKind::kSprites: {
      scene.planes.push_back({Vec3(0.0, 0.0, distance),
                              Vec3(0.1 * u(rng), 0.1 * u(rng), -1.0).normalized()});
      const int count = 6 + static_cast<int>(u01(rng) * 9);
      const double half_w = 0.5 * spec.intrinsics.width / spec.intrinsics.fx;
      const double half_h = 0.5 * spec.intrinsics.height / spec.intrinsics.fy;
      for (int i = 0; i < count; ++i) {
        const double z = distance * (0.4 + 0.5 * u01(rng));
        scene.spheres.push_back(
            {Vec3(u(rng) * half_w * z, u(rng) * half_h * z, z), z * (0.04 + 0.08 * u01(rng))});
      }
      break;
    }
  }
  return scene;
}

GeometryKind parse_geometry(const std::string& v) {
  if (v == "plane") return GeometryKind::kPlane;
  if (v == "heightfield") return GeometryKind::kHeightField;
  if (v == "sprites") return GeometryKind::kSprites;
  if (v == "random") return GeometryKind::kRandom;
  throw Error(ErrorKind::kBadFormat, "unknown geometry '" + v + "'");
}

TrajectoryKind parse_trajectory(const std::string& v) {
  if (v == "straight") return TrajectoryKind::kStraight;
  if (v == "arc") return TrajectoryKind::kArc;
  if (v == "spline") return TrajectoryKind::kSpline;
  if (v == "random") return TrajectoryKind::kRandom;
  throw Error(ErrorKind::kBadFormat, "unknown trajectory '" + v + "'");
}

}  // namespace

std::string to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::kPlane: return "plane";
    case GeometryKind::kHeightField: return "heightfield";
    case GeometryKind::kSprites: return "sprites";
    case GeometryKind::kRandom: return "random";
  }
  return "?";
}

std::string to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::kStraight: return "straight";
    case TrajectoryKind::kArc: return "arc";
    case TrajectoryKind::kSpline: return "spline";
    case TrajectoryKind::kRandom: return "random";
  }
  return "?";
}

void SceneSpec::validate() const {
  intrinsics.validate();
  require_reprojection_intrinsics(intrinsics);
  if (frame_count < 1 || !(fps > 0.0) || !(speed >= 0.0) || !(min_distance > 0.5) ||
      !(max_distance >= min_distance) || !(max_distance < 150.0) || !(texture_scale > 0.0)) {
    throw Error(ErrorKind::kDegenerateSpec, "scene spec out of range");
  }
}

bool SceneSpec::set(const std::string& key, const std::string& value) {
  try {
    if (key == "geometry") geometry = parse_geometry(value);
    else if (key == "trajectory") trajectory = parse_trajectory(value);
    else if (key == "texture_seed") texture_seed = std::stoull(value);
    else if (key == "speed") speed = std::stod(value);
    else if (key == "frame_count") frame_count = std::stoi(value);
    else if (key == "fps") fps = std::stod(value);
    else if (key == "min_distance") min_distance = std::stod(value);
    else if (key == "max_distance") max_distance = std::stod(value);
    else if (key == "texture_scale") texture_scale = std::stod(value);
    else if (key == "size") {
      const int s = std::stoi(value);
      intrinsics = intrinsics.resized(s, s);
    }
    else if (key == "fx") intrinsics.fx = std::stod(value);
    else if (key == "fy") intrinsics.fy = std::stod(value);
    else if (key == "cx") intrinsics.cx = std::stod(value);
    else if (key == "cy") intrinsics.cy = std::stod(value);
    else if (key == "width") intrinsics.width = std::stoi(value);
    else if (key == "height") intrinsics.height = std::stoi(value);
    else return false;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::kBadFormat, "bad value for '" + key + "'");
  }
  return true;
}

std::string SceneSpec::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "geometry=" << to_string(geometry) << '\n'
     << "trajectory=" << to_string(trajectory) << '\n'
     << "texture_seed=" << texture_seed << '\n'
     << "speed=" << speed << '\n'
     << "frame_count=" << frame_count << '\n'
     << "fps=" << fps << '\n'
     << "min_distance=" << min_distance << '\n'
     << "max_distance=" << max_distance << '\n'
     << "texture_scale=" << texture_scale << '\n'
     << "fx=" << intrinsics.fx << '\n'
     << "fy=" << intrinsics.fy << '\n'
     << "cx=" << intrinsics.cx << '\n'
     << "cy=" << intrinsics.cy << '\n'
     << "width=" << intrinsics.width << '\n'
     << "height=" << intrinsics.height << '\n';
  return os.str();
}

SceneSpec SceneSpec::from_text(const std::string& text) {
  SceneSpec spec;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kBadFormat, "spec line: " + line);
    if (!spec.set(line.substr(0, eq), line.substr(eq + 1))) {
      throw Error(ErrorKind::kBadFormat, "unknown spec key '" + line.substr(0, eq) + "'");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec SceneSpec::preset(const std::string& name) {
  SceneSpec spec;
  if (name == "default") return spec;
  if (name == "toy") {
    spec.frame_count = 4;
    return spec;
  }
  if (name == "plane") {
    spec.geometry = GeometryKind::kPlane;
    spec.trajectory = TrajectoryKind::kStraight;
    return spec;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown scene preset '" + name + "'");
}

SequenceSample generate_synthetic(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(mix64(seed ^ 0xA5A5A5A5ULL));
  GeometryKind geometry = spec.geometry;
  TrajectoryKind trajectory = spec.trajectory;
  if (geometry == GeometryKind::kRandom) geometry = static_cast<GeometryKind>(rng() % 3);
  if (trajectory == TrajectoryKind::kRandom) trajectory = static_cast<TrajectoryKind>(rng() % 3);
  const Scene scene = make_scene(geometry, spec, seed, rng);
  const auto poses = make_trajectory(trajectory, spec, rng);

  SequenceSample out;
  out.id = "synth_" + std::to_string(seed);
  out.intrinsics = spec.intrinsics;
  for (int t = 0; t < spec.frame_count; ++t) {
    Frame f;
    render(scene, poses[t], spec.intrinsics, f);
    f.pose = poses[t];
    f.motion = t == 0 ? RigidTransform::identity() : motion_between(poses[t - 1], poses[t]);
    out.frames.push_back(std::move(f));
  }
  return out;
}

SequenceSample generate_plane_sequence(const Intrinsics& k, double distance, const Vec3& step,
                                       int frame_count, std::uint64_t seed, double texture_scale) {
  Scene scene;
  scene.planes.push_back({Vec3(0.0, 0.0, distance), Vec3(0.0, 0.0, -1.0)});
  for (int c = 0; c < 3; ++c) scene.texture[c] = ValueNoise(mix64(seed) + static_cast<std::uint64_t>(c));
  scene.wavelength = texture_scale * distance / 10.0;
  SequenceSample out;
  out.id = "plane_" + std::to_string(seed);
  out.intrinsics = k;
  for (int t = 0; t < frame_count; ++t) {
    CameraPose pose;
    pose.position = step * static_cast<double>(t);
    Frame f;
    render(scene, pose, k, f);
    f.pose = pose;
    f.motion = t == 0 ? RigidTransform::identity()
                      : motion_between(out.frames.back().pose.value(), pose);
    out.frames.push_back(std::move(f));
  }
  return out;
}

}  // namespace mdepth
