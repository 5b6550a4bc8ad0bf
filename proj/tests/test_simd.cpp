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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mdepth/ops.hpp"
#include "mdepth/simd/kernels.hpp"
#include "test_util.hpp"

namespace mdepth::simd {
namespace {

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512}) {
    if (isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

// Restores the dispatch target when a test ends.
class IsaGuard {
 public:
  IsaGuard() : saved_(active_isa()) {}
  ~IsaGuard() { set_active_isa(saved_); }

 private:
  Isa saved_;
};

template <typename T>
std::vector<T> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return v;
}

// Reference product in double: C = op(A) op(B) (+ C).
template <typename T>
std::vector<double> reference_gemm(Trans ta, Trans tb, int m, int n, int k, const std::vector<T>& a,
                                   int lda, const std::vector<T>& b, int ldb,
                                   const std::vector<T>& c, int ldc, bool accumulate) {
  std::vector<double> out(static_cast<std::size_t>(m) * ldc);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = accumulate ? c[i * ldc + j] : 0.0;
      for (int p = 0; p < k; ++p) {
        const double av = ta == Trans::kNo ? a[i * lda + p] : a[p * lda + i];
        const double bv = tb == Trans::kNo ? b[p * ldb + j] : b[j * ldb + p];
        acc += av * bv;
      }
      out[i * ldc + j] = acc;
    }
  return out;
}

struct GemmCase {
  int m, n, k;
};

template <typename T>
void check_gemm_variants(double tol) {
  IsaGuard guard;
  const GemmCase cases[] = {{1, 1, 1}, {7, 5, 3}, {17, 33, 65}, {64, 48, 300}, {130, 19, 9},
                            {3, 129, 257}};
  std::uint64_t seed = 1;
  for (Isa isa : supported_isas()) {
    set_active_isa(isa);
    for (const auto& cs : cases)
      for (Trans ta : {Trans::kNo, Trans::kYes})
        for (Trans tb : {Trans::kNo, Trans::kYes})
          for (bool acc : {false, true}) {
            const int lda = (ta == Trans::kNo ? cs.k : cs.m) + 2;
            const int ldb = (tb == Trans::kNo ? cs.n : cs.k) + 1;
            const int ldc = cs.n + 3;
            const auto a = random_values<T>(static_cast<std::size_t>(ta == Trans::kNo ? cs.m : cs.k) * lda, ++seed);
            const auto b = random_values<T>(static_cast<std::size_t>(tb == Trans::kNo ? cs.k : cs.n) * ldb, ++seed);
            auto c = random_values<T>(static_cast<std::size_t>(cs.m) * ldc, ++seed);
            const auto want = reference_gemm(ta, tb, cs.m, cs.n, cs.k, a, lda, b, ldb, c, ldc, acc);
            gemm(ta, tb, cs.m, cs.n, cs.k, a.data(), lda, b.data(), ldb, c.data(), ldc, acc);
            double worst = 0.0;
            for (int i = 0; i < cs.m; ++i)
              for (int j = 0; j < cs.n; ++j)
                worst = std::max(worst, std::abs(c[i * ldc + j] - want[i * ldc + j]) /
                                            std::sqrt(static_cast<double>(cs.k)));
            EXPECT_LT(worst, tol) << to_string(isa) << " m=" << cs.m << " n=" << cs.n
                                  << " k=" << cs.k << " ta=" << (ta == Trans::kYes)
                                  << " tb=" << (tb == Trans::kYes) << " acc=" << acc;
          }
  }
}

TEST(SimdGemm, FloatVariantsMatchReference) { check_gemm_variants<float>(1e-5); }
TEST(SimdGemm, DoubleVariantsMatchReference) { check_gemm_variants<double>(1e-13); }

TEST(SimdGemm, PaddingColumnsUntouched) {
  IsaGuard guard;
  for (Isa isa : supported_isas()) {
    set_active_isa(isa);
    const int m = 9, n = 11, k = 5, ldc = 16;
    const auto a = random_values<float>(m * k, 1), b = random_values<float>(k * n, 2);
    std::vector<float> c(m * ldc, 123.0f);
    gemm(Trans::kNo, Trans::kNo, m, n, k, a.data(), k, b.data(), n, c.data(), ldc, false);
    for (int i = 0; i < m; ++i)
      for (int j = n; j < ldc; ++j) EXPECT_EQ(c[i * ldc + j], 123.0f) << to_string(isa);
  }
}

TEST(SimdLeakyRelu, BitExactAcrossVariants) {
  const auto x = random_values<float>(1037, 5), dy = random_values<float>(1037, 6);
  std::vector<float> y_ref(x.size()), dx_ref(x.size());
  scalar::leaky_relu_forward(x.data(), x.size(), 0.1f, y_ref.data());
  scalar::leaky_relu_backward(x.data(), dy.data(), x.size(), 0.1f, dx_ref.data());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(y_ref[i], x[i] >= 0 ? x[i] : 0.1f * x[i]);
  }
  std::vector<float> y(x.size()), dx(x.size());
  if (isa_supported(Isa::kAvx2)) {
    avx2::leaky_relu_forward(x.data(), x.size(), 0.1f, y.data());
    avx2::leaky_relu_backward(x.data(), dy.data(), x.size(), 0.1f, dx.data());
    EXPECT_EQ(y, y_ref);
    EXPECT_EQ(dx, dx_ref);
  }
  if (isa_supported(Isa::kAvx512)) {
    avx512::leaky_relu_forward(x.data(), x.size(), 0.1f, y.data());
    avx512::leaky_relu_backward(x.data(), dy.data(), x.size(), 0.1f, dx.data());
    EXPECT_EQ(y, y_ref);
    EXPECT_EQ(dx, dx_ref);
  }
}

TEST(SimdAdam, BitExactAcrossVariants) {
  const std::size_t n = 1029;
  const AdamCoeffs c{0.9f, 0.999f, 0.1f, 0.001f, 1e-3f / 0.1f, 1.0f / 0.001f, 1e-8f};
  auto run = [&](auto fn) {
    auto p = random_values<float>(n, 1);
    auto m = random_values<float>(n, 2);
    auto v = random_values<float>(n, 3);
    for (auto& x : v) x = std::abs(x);
    for (int step = 0; step < 3; ++step) {
      const auto g = random_values<float>(n, 10 + step);
      fn(p.data(), g.data(), m.data(), v.data(), n, c);
    }
    return std::vector<std::vector<float>>{p, m, v};
  };
  const auto ref = run(scalar::adam_update);
  if (isa_supported(Isa::kAvx2)) {
    EXPECT_EQ(run(avx2::adam_update), ref);
  }
  if (isa_supported(Isa::kAvx512)) {
    EXPECT_EQ(run(avx512::adam_update), ref);
  }
}

TEST(SimdDispatch, DefaultIsSupportedAndSwitchable) {
  IsaGuard guard;
  EXPECT_TRUE(isa_supported(default_isa()));
  EXPECT_TRUE(isa_supported(Isa::kScalar));
  for (Isa isa : supported_isas()) {
    set_active_isa(isa);
    EXPECT_EQ(active_isa(), isa);
  }
}

// A whole convolution agrees across dispatch targets.
TEST(SimdDispatch, ConvolutionAgreesAcrossVariants) {
  IsaGuard guard;
  const auto in = testing::random_tensor<float>(12, 10, 7, 3);
  const auto w = random_values<float>(9 * 7 * 5, 4);
  const auto b = random_values<float>(5, 5);
  set_active_isa(Isa::kScalar);
  const auto ref = conv3x3_forward<float>(in, w, b, {7, 5, 1});
  for (Isa isa : supported_isas()) {
    set_active_isa(isa);
    const auto got = conv3x3_forward<float>(in, w, b, {7, 5, 1});
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-5) << to_string(isa);
  }
}

}  // namespace
}  // namespace mdepth::simd
