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

#include "mdepth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace mdepth {

namespace {

constexpr char kMagic[4] = {'M', '4', 'D', 'C'};
constexpr std::string_view kConfigPrefix = "#config\n";

static_assert(std::endian::native == std::endian::little, "little-endian host required");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  void take(void* dst, std::size_t n) {
    if (n > bytes_.size() - pos_) throw Error(ErrorKind::kBadFormat, "truncated checkpoint");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    take(&v, 4);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_tensor_file(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::string out(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    std::size_t n = 1;
    for (auto d : t.dims) n *= d;
    if (n != t.data.size()) {
      throw Error(ErrorKind::kShapeMismatch, "tensor '" + t.name + "' dims do not match data");
    }
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kMissingFile, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::kMissingFile, "write failed: " + path.string());
}

std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kMissingFile, "cannot open " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(f), {}));
  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::kBadFormat, "bad checkpoint magic");
  if (r.u32() != kCheckpointVersion) throw Error(ErrorKind::kBadFormat, "unsupported version");
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name.resize(r.u32());
    r.take(t.name.data(), t.name.size());
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw Error(ErrorKind::kBadFormat, "implausible tensor rank");
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      t.dims.push_back(r.u32());
      n *= t.dims.back();
    }
    t.data.resize(n);
    r.take(t.data.data(), n * sizeof(float));
    out.push_back(std::move(t));
  }
  if (!r.done()) throw Error(ErrorKind::kBadFormat, "trailing bytes in checkpoint");
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const DepthNetwork<float>& net) {
  std::vector<NamedTensor> tensors;
  tensors.push_back({std::string(kConfigPrefix) + net.config().to_text(), {0}, {}});
  for (const auto& p : net.params()) {
    NamedTensor t{p.name, {}, {p.value.values().begin(), p.value.values().end()}};
    for (int d : p.dims) t.dims.push_back(static_cast<std::uint32_t>(d));
    tensors.push_back(std::move(t));
  }
  write_tensor_file(path, tensors);
}

DepthNetwork<float> load_checkpoint(const std::filesystem::path& path) {
  const auto tensors = read_tensor_file(path);
  if (tensors.empty() || tensors[0].name.rfind(kConfigPrefix, 0) != 0) {
    throw Error(ErrorKind::kBadFormat, "checkpoint lacks a network configuration");
  }
  DepthNetwork<float> net(NetworkConfig::from_text(tensors[0].name.substr(kConfigPrefix.size())),
                          0);
  auto& params = net.params();
  if (tensors.size() != params.size() + 1) {
    throw Error(ErrorKind::kBadFormat, "checkpoint tensor count does not match the network");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i + 1];
    auto& p = params[i];
    const std::vector<std::uint32_t> dims(p.dims.begin(), p.dims.end());
    if (t.name != p.name || t.dims != dims) {
      throw Error(ErrorKind::kBadFormat, "checkpoint entry '" + t.name + "' does not match '" +
                                             p.name + "'");
    }
    std::copy(t.data.begin(), t.data.end(), p.value.values().begin());
  }
  return net;
}

}  // namespace mdepth
