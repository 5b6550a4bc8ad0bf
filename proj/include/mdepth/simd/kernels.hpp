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

#include <cstddef>

namespace mdepth::simd {

enum class Isa { kScalar, kAvx2, kAvx512 };

const char* to_string(Isa isa);

// True when the CPU can execute kernels compiled for `isa`.
bool isa_supported(Isa isa);

// Widest supported ISA, unless MDEPTH_SIMD=scalar|avx2|avx512 overrides it.
Isa default_isa();

Isa active_isa();

// Switches the kernel table. Throws Error(kInvalidArgument) if unsupported.
void set_active_isa(Isa isa);

enum class Trans { kNo, kYes };

// C (+)= op(A) * op(B), all row-major. op(A) is m x k, op(B) is k x n.
// With accumulate=false C is overwritten.
void gemm(Trans ta, Trans tb, int m, int n, int k, const float* a, int lda, const float* b,
          int ldb, float* c, int ldc, bool accumulate);
void gemm(Trans ta, Trans tb, int m, int n, int k, const double* a, int lda, const double* b,
          int ldb, double* c, int ldc, bool accumulate);

void leaky_relu_forward(const float* x, std::size_t n, float slope, float* y);
void leaky_relu_backward(const float* x, const float* dy, std::size_t n, float slope, float* dx);

// One Adam update over a flat parameter array. `step_size` is
// lr / (1 - beta1^t) and `bias2` is 1 / (1 - beta2^t), both precomputed.
struct AdamCoeffs {
  float beta1, beta2, one_minus_beta1, one_minus_beta2, step_size, bias2, eps;
};
void adam_update(float* param, const float* grad, float* m, float* v, std::size_t n,
                 const AdamCoeffs& c);

// Per-ISA entry points, exposed so equivalence tests can pin a variant.
#define MDEPTH_SIMD_DECLARE_VARIANT(ns)                                                         \
  namespace ns {                                                                                \
  void gemm(Trans ta, Trans tb, int m, int n, int k, const float* a, int lda, const float* b,  \
            int ldb, float* c, int ldc, bool accumulate);                                       \
  void gemm(Trans ta, Trans tb, int m, int n, int k, const double* a, int lda, const double* b, \
            int ldb, double* c, int ldc, bool accumulate);                                      \
  void leaky_relu_forward(const float* x, std::size_t n, float slope, float* y);                \
  void leaky_relu_backward(const float* x, const float* dy, std::size_t n, float slope,         \
                           float* dx);                                                          \
  void adam_update(float* param, const float* grad, float* m, float* v, std::size_t n,         \
                   const AdamCoeffs& c);                                                        \
  }

MDEPTH_SIMD_DECLARE_VARIANT(scalar)
MDEPTH_SIMD_DECLARE_VARIANT(avx2)
MDEPTH_SIMD_DECLARE_VARIANT(avx512)

#undef MDEPTH_SIMD_DECLARE_VARIANT

}  // namespace mdepth::simd
