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

// AVX-512F kernels. GEMM only; the element-wise kernels reuse the AVX2 code,
// which is already memory bound.

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "mdepth/simd/kernels.hpp"

namespace mdepth::simd::avx512 {

namespace {

struct F32x16 {
  using T = float;
  using R = __m512;
  static constexpr int W = 16;
  static R zero() { return _mm512_setzero_ps(); }
  static R load(const T* p) { return _mm512_loadu_ps(p); }
  static void store(T* p, R r) { _mm512_storeu_ps(p, r); }
  static R bcast(T x) { return _mm512_set1_ps(x); }
  static R fmadd(R a, R b, R c) { return _mm512_fmadd_ps(a, b, c); }
};

struct F64x8 {
  using T = double;
  using R = __m512d;
  static constexpr int W = 8;
  static R zero() { return _mm512_setzero_pd(); }
  static R load(const T* p) { return _mm512_loadu_pd(p); }
  static void store(T* p, R r) { _mm512_storeu_pd(p, r); }
  static R bcast(T x) { return _mm512_set1_pd(x); }
  static R fmadd(R a, R b, R c) { return _mm512_fmadd_pd(a, b, c); }
};

#include "gemm_driver.inl"

}  // namespace

void gemm(Trans ta, Trans tb, int m, int n, int k, const float* a, int lda, const float* b,
          int ldb, float* c, int ldc, bool accumulate) {
  GemmKernel<F32x16, 12, 2>::run(ta, tb, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void gemm(Trans ta, Trans tb, int m, int n, int k, const double* a, int lda, const double* b,
          int ldb, double* c, int ldc, bool accumulate) {
  GemmKernel<F64x8, 12, 2>::run(ta, tb, m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void leaky_relu_forward(const float* x, std::size_t n, float slope, float* y) {
  avx2::leaky_relu_forward(x, n, slope, y);
}

void leaky_relu_backward(const float* x, const float* dy, std::size_t n, float slope, float* dx) {
  avx2::leaky_relu_backward(x, dy, n, slope, dx);
}

void adam_update(float* param, const float* grad, float* m, float* v, std::size_t n,
                 const AdamCoeffs& c) {
  avx2::adam_update(param, grad, m, v, n, c);
}

}  // namespace mdepth::simd::avx512
