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

// Reference kernels. Plain loops with a fixed summation order; every SIMD
// variant is tested against these.

#include <cmath>

#include "mdepth/simd/kernels.hpp"

namespace mdepth::simd::scalar {

namespace {

template <typename T>
void gemm_ref(Trans ta, Trans tb, int m, int n, int k, const T* a, int lda, const T* b, int ldb,
              T* c, int ldc, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = accumulate ? c[i * ldc + j] : T(0);
      for (int p = 0; p < k; ++p) {
        const T av = ta == Trans::kNo ? a[i * lda + p] : a[p * lda + i];
        const T bv = tb == Trans::kNo ? b[p * ldb + j] : b[j * ldb + p];
        acc += av * bv;
      }
      c[i * ldc + j] = acc;
    }
  }
}

}  // namespace

void gemm(Trans ta, Trans tb, int m, int n, int k, const float* a, int lda, const float* b,
          int ldb, float* c, int ldc, bool accumulate) {
  gemm_ref(ta, tb, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void gemm(Trans ta, Trans tb, int m, int n, int k, const double* a, int lda, const double* b,
          int ldb, double* c, int ldc, bool accumulate) {
  gemm_ref(ta, tb, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void leaky_relu_forward(const float* x, std::size_t n, float slope, float* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0f ? x[i] : slope * x[i];
}

void leaky_relu_backward(const float* x, const float* dy, std::size_t n, float slope, float* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] >= 0.0f ? dy[i] : slope * dy[i];
}

void adam_update(float* param, const float* grad, float* m, float* v, std::size_t n,
                 const AdamCoeffs& c) {
  for (std::size_t i = 0; i < n; ++i) {
    const float g = grad[i];
    m[i] = c.beta1 * m[i] + c.one_minus_beta1 * g;
    v[i] = c.beta2 * v[i] + c.one_minus_beta2 * (g * g);
    const float denom = std::sqrt(v[i] * c.bias2) + c.eps;
    param[i] = param[i] - c.step_size * m[i] / denom;
  }
}

}  // namespace mdepth::simd::scalar
