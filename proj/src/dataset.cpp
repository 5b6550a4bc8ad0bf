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

#include "mdepth/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdepth/image_io.hpp"
#include "mdepth/ops.hpp"

namespace mdepth {

namespace fs = std::filesystem;

namespace {

std::string frame_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.%s", index, ext);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, const fs::path& path, int line_no) {
  double v = 0.0;
  const char* b = s.data();
  while (b < s.data() + s.size() && *b == ' ') ++b;
  const auto r = std::from_chars(b, s.data() + s.size(), v);
  if (r.ec != std::errc{}) {
    throw Error(ErrorKind::kBadFormat, path.string() + ":" + std::to_string(line_no) +
                                           ": bad number '" + s + "'");
  }
  return v;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kMissingFile, "missing directory " + dir.string());
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) ++n;
  }
  return n;
}

}  // namespace

std::vector<CameraPose> read_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "missing pose file " + path.string());
  std::vector<CameraPose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("frame_index", 0) == 0) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8) {
      throw Error(ErrorKind::kBadFormat, path.string() + ":" + std::to_string(line_no) +
                                             ": expected 8 columns");
    }
    const double index = parse_double(cells[0], path, line_no);
    if (index != static_cast<double>(poses.size())) {
      throw Error(ErrorKind::kBadFormat, path.string() + ":" + std::to_string(line_no) +
                                             ": frame indices must be contiguous from 0");
    }
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = parse_double(cells[i + 1], path, line_no);
    CameraPose p;
    p.position = Vec3(v[0], v[1], v[2]);
    p.orientation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]);
    poses.push_back(p);
  }
  return poses;
}

void write_poses(const fs::path& path, const std::vector<CameraPose>& poses) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kMissingFile, "cannot write " + path.string());
  out << "frame_index,px,py,pz,qw,qx,qy,qz\n";
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto& p = poses[i];
    out << i << ',' << shortest(p.position.x()) << ',' << shortest(p.position.y()) << ','
        << shortest(p.position.z()) << ',' << shortest(p.orientation.w()) << ','
        << shortest(p.orientation.x()) << ',' << shortest(p.orientation.y()) << ','
        << shortest(p.orientation.z()) << '\n';
  }
}

CameraPose advance_pose(const CameraPose& previous, const RigidTransform& motion) {
  // motion = (R_prev^T R_cur, R_cur^T (p_cur - p_prev))
  const Mat3 r_prev = previous.orientation.normalized().toRotationMatrix();
  const Mat3 r_cur = r_prev * motion.rotation;
  CameraPose out;
  out.orientation = Eigen::Quaterniond(r_cur).normalized();
  out.position = previous.position + r_cur * motion.translation;
  return out;
}

std::vector<fs::path> list_sequences(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorKind::kMissingFile, "missing dataset " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "camera.txt")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

SequenceSample load_sequence(const fs::path& dir) {
  SequenceSample s;
  s.id = dir.filename().string();
  s.intrinsics = read_camera_file(dir / "camera.txt");
  const auto poses = read_poses(dir / "poses.csv");
  const std::size_t n = count_files(dir / "rgb", ".png");
  if (poses.size() != n) {
    throw Error(ErrorKind::kPoseCountMismatch, s.id + ": " + std::to_string(poses.size()) +
                                                   " poses for " + std::to_string(n) + " images");
  }
  for (std::size_t t = 0; t < n; ++t) {
    Frame f;
    f.rgb = read_png_rgb(dir / "rgb" / frame_name(t, "png"));
    f.depth = read_pfm(dir / "depth" / frame_name(t, "pfm"));
    for (float d : f.depth.values()) {
      if (!std::isfinite(d) || !(d > 0.0f)) {
        throw Error(ErrorKind::kCorruptDepth, s.id + ": frame " + std::to_string(t) +
                                                  " has a NaN or non-positive depth");
      }
    }
    f.pose = poses[t];
    f.motion = t == 0 ? RigidTransform::identity() : motion_between(poses[t - 1], poses[t]);
    s.frames.push_back(std::move(f));
  }
  s.validate();
  return s;
}

DatasetReader::DatasetReader(const fs::path& root) : dirs_(list_sequences(root)) {}

bool DatasetReader::next(SequenceSample& out) {
  if (cursor_ >= dirs_.size()) return false;
  out = load_sequence(dirs_[cursor_++]);
  return true;
}

std::vector<SequenceSample> load_dataset(const fs::path& root) {
  DatasetReader reader(root);
  std::vector<SequenceSample> out;
  SequenceSample s;
  while (reader.next(s)) out.push_back(std::move(s));
  return out;
}

void save_sequence(const fs::path& dir, const SequenceSample& sample) {
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "depth");
  write_camera_file(dir / "camera.txt", sample.intrinsics);
  std::vector<CameraPose> poses;
  for (std::size_t t = 0; t < sample.frames.size(); ++t) {
    const Frame& f = sample.frames[t];
    if (f.pose) {
      poses.push_back(*f.pose);
    } else {
      poses.push_back(t == 0 ? CameraPose{} : advance_pose(poses.back(), f.motion));
    }
    write_png_rgb(dir / "rgb" / frame_name(t, "png"), f.rgb);
    write_pfm(dir / "depth" / frame_name(t, "pfm"), f.depth);
  }
  write_poses(dir / "poses.csv", poses);
}

void save_dataset(const fs::path& root, const std::vector<SequenceSample>& samples) {
  for (const auto& s : samples) save_sequence(root / s.id, s);
}

std::vector<SequenceSample> preprocess(const SequenceSample& sample, const PreprocessConfig& cfg) {
  if (cfg.subsample < 1 || cfg.clip_len < 1 || cfg.out_size < 0) {
    throw Error(ErrorKind::kInvalidArgument, "preprocess settings must be positive");
  }
  if (sample.frames.empty()) throw Error(ErrorKind::kInvalidArgument, "empty sequence");
  const std::size_t s = static_cast<std::size_t>(cfg.subsample);
  const std::size_t kept = sample.frames.size() / s;
  std::vector<Frame> frames;
  frames.reserve(kept);
  for (std::size_t k = 0; k < kept; ++k) {
    Frame f = sample.frames[k * s];
    if (k == 0) {
      f.motion = RigidTransform::identity();
    } else {
      RigidTransform acc = sample.frames[(k - 1) * s + 1].motion;
      for (std::size_t j = (k - 1) * s + 2; j <= k * s; ++j) {
        acc = compose(acc, sample.frames[j].motion);
      }
      f.motion = acc;
    }
    frames.push_back(std::move(f));
  }

  const bool resize = cfg.out_size > 0 && (cfg.out_size != sample.intrinsics.width ||
                                            cfg.out_size != sample.intrinsics.height);
  const Intrinsics k = resize ? sample.intrinsics.resized(cfg.out_size, cfg.out_size)
                              : sample.intrinsics;
  std::vector<SequenceSample> clips;
  const std::size_t len = static_cast<std::size_t>(cfg.clip_len);
  for (std::size_t c = 0; c + 1 <= kept / len; ++c) {
    SequenceSample clip;
    clip.id = sample.id + "_" + std::to_string(c);
    clip.intrinsics = k;
    for (std::size_t t = 0; t < len; ++t) {
      Frame f = frames[c * len + t];
      if (t == 0) f.motion = RigidTransform::identity();
      if (resize) {
        f.rgb = resize_bilinear(f.rgb, cfg.out_size, cfg.out_size);
        f.depth = resize_nearest(f.depth, cfg.out_size, cfg.out_size);
      }
      clip.frames.push_back(std::move(f));
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::pair<std::vector<int>, std::vector<int>> split_midair_style(const std::vector<int>& ids) {
  std::pair<std::vector<int>, std::vector<int>> out;
  for (int id : ids) {
    if (id < 0) throw Error(ErrorKind::kInvalidArgument, "trajectory ids must be non-negative");
    (id % 3 == 0 ? out.second : out.first).push_back(id);
  }
  return out;
}

}  // namespace mdepth
