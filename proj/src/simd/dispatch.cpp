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

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "mdepth/error.hpp"
#include "mdepth/simd/kernels.hpp"

namespace mdepth::simd {

namespace {

struct KernelTable {
  void (*sgemm)(Trans, Trans, int, int, int, const float*, int, const float*, int, float*, int,
                bool);
  void (*dgemm)(Trans, Trans, int, int, int, const double*, int, const double*, int, double*,
                int, bool);
  void (*lrelu_fwd)(const float*, std::size_t, float, float*);
  void (*lrelu_bwd)(const float*, const float*, std::size_t, float, float*);
  void (*adam)(float*, const float*, float*, float*, std::size_t, const AdamCoeffs&);
};

constexpr KernelTable kScalarTable{scalar::gemm, scalar::gemm, scalar::leaky_relu_forward,
                                   scalar::leaky_relu_backward, scalar::adam_update};
constexpr KernelTable kAvx2Table{avx2::gemm, avx2::gemm, avx2::leaky_relu_forward,
                                 avx2::leaky_relu_backward, avx2::adam_update};
constexpr KernelTable kAvx512Table{avx512::gemm, avx512::gemm, avx512::leaky_relu_forward,
                                   avx512::leaky_relu_backward, avx512::adam_update};

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kAvx2: return &kAvx2Table;
    case Isa::kAvx512: return &kAvx512Table;
    case Isa::kScalar: break;
  }
  return &kScalarTable;
}

struct ActiveState {
  std::atomic<Isa> isa;
  std::atomic<const KernelTable*> table;
  ActiveState() : isa(default_isa()), table(table_for(isa.load())) {}
};

ActiveState& state() {
  static ActiveState s;
  return s;
}

}  // namespace

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kAvx512: return "avx512";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
#if defined(__x86_64__) || defined(__i386__)
    case Isa::kAvx2:
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::kAvx512:
      return isa_supported(Isa::kAvx2) && __builtin_cpu_supports("avx512f");
#else
    default: return false;
#endif
  }
  return false;
}

Isa default_isa() {
  if (const char* env = std::getenv("MDEPTH_SIMD")) {
    const std::string_view v(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512}) {
      if (v == to_string(isa) && isa_supported(isa)) return isa;
    }
  }
  if (isa_supported(Isa::kAvx512)) return Isa::kAvx512;
  if (isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  return Isa::kScalar;
}

Isa active_isa() { return state().isa.load(); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error(ErrorKind::kInvalidArgument, std::string("ISA not supported: ") + to_string(isa));
  }
  state().isa.store(isa);
  state().table.store(table_for(isa));
}

void gemm(Trans ta, Trans tb, int m, int n, int k, const float* a, int lda, const float* b,
          int ldb, float* c, int ldc, bool accumulate) {
  state().table.load(std::memory_order_relaxed)->sgemm(ta, tb, m, n, k, a, lda, b, ldb, c, ldc,
                                                      accumulate);
}

void gemm(Trans ta, Trans tb, int m, int n, int k, const double* a, int lda, const double* b,
          int ldb, double* c, int ldc, bool accumulate) {
  state().table.load(std::memory_order_relaxed)->dgemm(ta, tb, m, n, k, a, lda, b, ldb, c, ldc,
                                                      accumulate);
}

void leaky_relu_forward(const float* x, std::size_t n, float slope, float* y) {
  state().table.load(std::memory_order_relaxed)->lrelu_fwd(x, n, slope, y);
}

void leaky_relu_backward(const float* x, const float* dy, std::size_t n, float slope, float* dx) {
  state().table.load(std::memory_order_relaxed)->lrelu_bwd(x, dy, n, slope, dx);
}

void adam_update(float* param, const float* grad, float* m, float* v, std::size_t n,
                 const AdamCoeffs& c) {
  state().table.load(std::memory_order_relaxed)->adam(param, grad, m, v, n, c);
}

}  // namespace mdepth::simd
