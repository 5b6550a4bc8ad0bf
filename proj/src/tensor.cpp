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

#include "mdepth/tensor.hpp"

#include <cmath>
#include <sstream>

namespace mdepth {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << s.height << "x" << s.width << "x" << s.channels;
  return os.str();
}

namespace {

template <typename T>
void scan(std::span<const T> v, const char* where) {
#ifdef MDEPTH_NAN_SCAN
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream os;
      os << where << ": non-finite value at flat index " << i;
      throw Error(ErrorKind::kInvalidArgument, os.str());
    }
  }
#else
  (void)v;
  (void)where;
#endif
}

}  // namespace

void check_finite(std::span<const float> v, const char* where) { scan(v, where); }
void check_finite(std::span<const double> v, const char* where) { scan(v, where); }

}  // namespace mdepth
