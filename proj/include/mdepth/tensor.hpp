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

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdepth/error.hpp"

namespace mdepth {

struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// H x W x C grid stored row-major with the channel index fastest.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  BasicTensor(int height, int width, int channels, T fill = T(0))
      : shape_{checked(height), checked(width), checked(channels)},
        data_(shape_.numel(), fill) {}
  explicit BasicTensor(const Shape& s, T fill = T(0))
      : BasicTensor(s.height, s.width, s.channels, fill) {}

  const Shape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  std::size_t index(int y, int x, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(shape_.channels) +
           static_cast<std::size_t>(c);
  }
  T& operator()(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  const T& operator()(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Pointer to the channel vector of pixel (y, x).
  T* pixel(int y, int x) { return data_.data() + index(y, x); }
  const T* pixel(int y, int x) const { return data_.data() + index(y, x); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out(shape_);
    std::transform(data_.begin(), data_.end(), out.data(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static int checked(int dim) {
    if (dim < 0) throw Error(ErrorKind::kShapeMismatch, "negative tensor dimension");
    return dim;
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

inline void require_shape(const Shape& got, const Shape& want, const char* what) {
  if (!(got == want)) {
    throw Error(ErrorKind::kShapeMismatch,
                std::string(what) + ": got " + to_string(got) + ", want " + to_string(want));
  }
}

// Learnable tensor. `dims` is the logical shape written to checkpoints; the
// value/grad storage is flat (1 x 1 x numel).
template <typename T>
struct BasicParamTensor {
  std::string name;
  std::vector<int> dims;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  bool is_bias = false;

  BasicParamTensor() = default;
  BasicParamTensor(std::string n, std::vector<int> d, bool bias)
      : name(std::move(n)), dims(std::move(d)), is_bias(bias) {
    std::size_t count = 1;
    for (int v : dims) count *= static_cast<std::size_t>(v);
    value = BasicTensor<T>(1, 1, static_cast<int>(count));
    grad = BasicTensor<T>(1, 1, static_cast<int>(count));
  }

  std::size_t numel() const { return value.size(); }
  void zero_grad() { grad.fill(T(0)); }
};

using ParamTensor = BasicParamTensor<float>;

// Debug-build scan for NaN/Inf after kernels; no-op otherwise.
void check_finite(std::span<const float> v, const char* where);
void check_finite(std::span<const double> v, const char* where);

}  // namespace mdepth
