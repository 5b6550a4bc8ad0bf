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

#include "mdepth/image_io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace mdepth {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

void write_pfm(const std::filesystem::path& path, const Tensor& depth) {
  if (depth.channels() != 1) throw Error(ErrorKind::kShapeMismatch, "PFM writer expects 1 channel");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kMissingFile, "cannot write " + path.string());
  f << "Pf\n" << depth.width() << ' ' << depth.height() << "\n-1.0\n";
  for (int y = depth.height() - 1; y >= 0; --y) {
    f.write(reinterpret_cast<const char*>(depth.pixel(y, 0)),
            static_cast<std::streamsize>(depth.width() * sizeof(float)));
  }
  if (!f) throw Error(ErrorKind::kMissingFile, "write failed: " + path.string());
}

Tensor read_pfm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kMissingFile, "missing depth file " + path.string());
  const std::string bytes(std::istreambuf_iterator<char>(f), {});
  // Header: three whitespace-terminated tokens, then a single whitespace byte.
  std::size_t pos = 0;
  const auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  const std::string magic = token();
  const std::string ws = token(), hs = token(), ss = token();
  if (magic != "Pf" || pos >= bytes.size()) {
    throw Error(ErrorKind::kBadFormat, path.string() + ": not a single-channel PFM");
  }
  ++pos;
  int w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoi(ws);
    h = std::stoi(hs);
    scale = std::stod(ss);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::kBadFormat, path.string() + ": bad PFM header");
  }
  if (w < 1 || h < 1) throw Error(ErrorKind::kBadFormat, path.string() + ": bad PFM size");
  if (scale >= 0.0) throw Error(ErrorKind::kBadFormat, path.string() + ": big-endian PFM");
  const std::size_t need = static_cast<std::size_t>(w) * h * sizeof(float);
  if (bytes.size() - pos != need) {
    throw Error(ErrorKind::kBadFormat, path.string() + ": PFM payload size mismatch");
  }
  Tensor out(h, w, 1);
  for (int y = h - 1; y >= 0; --y) {
    std::memcpy(out.pixel(y, 0), bytes.data() + pos, static_cast<std::size_t>(w) * sizeof(float));
    pos += static_cast<std::size_t>(w) * sizeof(float);
  }
  return out;
}

namespace {

std::uint8_t to_byte(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

}  // namespace

void quantize_8bit(Tensor& rgb) {
  for (auto& v : rgb.values()) v = static_cast<float>(to_byte(v)) / 255.0f;
}

void write_png_rgb(const std::filesystem::path& path, const Tensor& rgb) {
  if (rgb.channels() != 3) throw Error(ErrorKind::kShapeMismatch, "PNG writer expects 3 channels");
  std::vector<std::uint8_t> bytes(rgb.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(rgb[i]);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(rgb.width());
  image.height = static_cast<png_uint_32>(rgb.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorKind::kMissingFile, "cannot write " + path.string() + ": " + image.message);
  }
}

Tensor read_png_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingFile, "missing image " + path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorKind::kBadFormat, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::kBadFormat, path.string() + ": " + image.message);
  }
  Tensor out(static_cast<int>(image.height), static_cast<int>(image.width), 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = static_cast<float>(bytes[i]) / 255.0f;
  return out;
}

Tensor colorize_depth(const Tensor& depth, double min_depth, double max_depth) {
  const double lo = std::log(min_depth), hi = std::log(max_depth);
  Tensor out(depth.height(), depth.width(), 3);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = std::max(static_cast<double>(depth(y, x)), min_depth);
      const double t = std::clamp((std::log(d) - lo) / (hi - lo), 0.0, 1.0);
      // Near is red, far is blue.
      float* p = out.pixel(y, x);
      p[0] = static_cast<float>(1.0 - t);
      p[1] = static_cast<float>(1.0 - std::abs(2.0 * t - 1.0));
      p[2] = static_cast<float>(t);
    }
  }
  return out;
}

}  // namespace mdepth
