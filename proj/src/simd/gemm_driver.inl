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

// Packed GEMM driver shared by the SIMD translation units. Included inside an
// anonymous namespace by each ISA file so every instantiation is compiled with
// that file's target flags and never merged across ISAs.
//
// V is a vector-traits struct with: type T, register type R, lane count W,
// zero(), load(const T*), store(T*, R), bcast(T), fmadd(a, b, acc).

template <class V, int MR, int NV>
struct GemmKernel {
  using T = typename V::T;
  static constexpr int kMr = MR;
  static constexpr int kNr = NV * V::W;
  static constexpr int kKc = 256;
  static constexpr int kMc = MR * 16;
  static constexpr int kNc = kNr * 16;

  // c[MR x NR] (+)= a_panel[kc x MR] * b_panel[kc x NR].
  static void micro(int kc, const T* a, const T* b, T* c, int ldc, bool accumulate) {
    typename V::R acc[MR][NV];
    if (accumulate) {
#pragma GCC unroll 16
      for (int i = 0; i < MR; ++i)
#pragma GCC unroll 4
        for (int v = 0; v < NV; ++v) acc[i][v] = V::load(c + i * ldc + v * V::W);
    } else {
#pragma GCC unroll 16
      for (int i = 0; i < MR; ++i)
#pragma GCC unroll 4
        for (int v = 0; v < NV; ++v) acc[i][v] = V::zero();
    }
    for (int p = 0; p < kc; ++p) {
      typename V::R bv[NV];
#pragma GCC unroll 4
      for (int v = 0; v < NV; ++v) bv[v] = V::load(b + p * kNr + v * V::W);
#pragma GCC unroll 16
      for (int i = 0; i < MR; ++i) {
        const typename V::R av = V::bcast(a[p * MR + i]);
#pragma GCC unroll 4
        for (int v = 0; v < NV; ++v) acc[i][v] = V::fmadd(av, bv[v], acc[i][v]);
      }
    }
#pragma GCC unroll 16
    for (int i = 0; i < MR; ++i)
#pragma GCC unroll 4
      for (int v = 0; v < NV; ++v) V::store(c + i * ldc + v * V::W, acc[i][v]);
  }

  static void pack_a(Trans ta, const T* a, int lda, int i0, int mc, int p0, int kc, T* out) {
    for (int ir = 0; ir < mc; ir += MR) {
      const int mr = std::min(MR, mc - ir);
      T* panel = out + static_cast<std::size_t>(ir) * kc;
      if (ta == Trans::kNo) {
        for (int i = 0; i < mr; ++i) {
          const T* src = a + static_cast<std::size_t>(i0 + ir + i) * lda + p0;
          for (int p = 0; p < kc; ++p) panel[static_cast<std::size_t>(p) * MR + i] = src[p];
        }
      } else {
        for (int p = 0; p < kc; ++p) {
          const T* src = a + static_cast<std::size_t>(p0 + p) * lda + i0 + ir;
          T* dst = panel + static_cast<std::size_t>(p) * MR;
          for (int i = 0; i < mr; ++i) dst[i] = src[i];
        }
      }
      for (int i = mr; i < MR; ++i)
        for (int p = 0; p < kc; ++p) panel[static_cast<std::size_t>(p) * MR + i] = T(0);
    }
  }

  static void pack_b(Trans tb, const T* b, int ldb, int p0, int kc, int j0, int nc, T* out) {
    for (int jr = 0; jr < nc; jr += kNr) {
      const int nr = std::min(kNr, nc - jr);
      T* panel = out + static_cast<std::size_t>(jr) * kc;
      if (tb == Trans::kNo) {
        for (int p = 0; p < kc; ++p) {
          const T* src = b + static_cast<std::size_t>(p0 + p) * ldb + j0 + jr;
          T* dst = panel + static_cast<std::size_t>(p) * kNr;
          for (int j = 0; j < nr; ++j) dst[j] = src[j];
        }
      } else {
        for (int j = 0; j < nr; ++j) {
          const T* src = b + static_cast<std::size_t>(j0 + jr + j) * ldb + p0;
          for (int p = 0; p < kc; ++p) panel[static_cast<std::size_t>(p) * kNr + j] = src[p];
        }
      }
      for (int j = nr; j < kNr; ++j)
        for (int p = 0; p < kc; ++p) panel[static_cast<std::size_t>(p) * kNr + j] = T(0);
    }
  }

  static void run(Trans ta, Trans tb, int m, int n, int k, const T* a, int lda, const T* b,
                  int ldb, T* c, int ldc, bool accumulate) {
    if (m <= 0 || n <= 0) return;
    if (k <= 0) {
      if (!accumulate)
        for (int i = 0; i < m; ++i) std::fill(c + static_cast<std::size_t>(i) * ldc,
                                              c + static_cast<std::size_t>(i) * ldc + n, T(0));
      return;
    }
    thread_local std::vector<T> a_buf;
    thread_local std::vector<T> b_buf;
    a_buf.resize(static_cast<std::size_t>(kMc) * kKc);
    b_buf.resize(static_cast<std::size_t>(kNc) * kKc);
    alignas(64) T edge[MR * kNr] = {};

    for (int jc = 0; jc < n; jc += kNc) {
      const int nc = std::min(kNc, n - jc);
      for (int pc = 0; pc < k; pc += kKc) {
        const int kc = std::min(kKc, k - pc);
        const bool acc_here = accumulate || pc > 0;
        pack_b(tb, b, ldb, pc, kc, jc, nc, b_buf.data());
        for (int ic = 0; ic < m; ic += kMc) {
          const int mc = std::min(kMc, m - ic);
          pack_a(ta, a, lda, ic, mc, pc, kc, a_buf.data());
          for (int jr = 0; jr < nc; jr += kNr) {
            const int nr = std::min(kNr, nc - jr);
            const T* bp = b_buf.data() + static_cast<std::size_t>(jr) * kc;
            for (int ir = 0; ir < mc; ir += MR) {
              const int mr = std::min(MR, mc - ir);
              const T* ap = a_buf.data() + static_cast<std::size_t>(ir) * kc;
              T* cp = c + static_cast<std::size_t>(ic + ir) * ldc + jc + jr;
              if (mr == MR && nr == kNr) {
                micro(kc, ap, bp, cp, ldc, acc_here);
              } else {
                if (acc_here) {
                  for (int i = 0; i < mr; ++i)
                    for (int j = 0; j < nr; ++j) edge[i * kNr + j] = cp[i * ldc + j];
                }
                micro(kc, ap, bp, edge, kNr, acc_here);
                for (int i = 0; i < mr; ++i)
                  for (int j = 0; j < nr; ++j) cp[i * ldc + j] = edge[i * kNr + j];
              }
            }
          }
        }
      }
    }
  }
};
