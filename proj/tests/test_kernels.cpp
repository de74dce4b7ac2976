// Copyright 2026 The hnav Authors. All Rights Reserved.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hnav/kernels.hpp"

using namespace hnav::kernels;

namespace {

std::vector<double> randv(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return m;
}

// Triple loop reference for C += op(A) op(B).
std::vector<double> naive(std::size_t m, std::size_t n, std::size_t k, const std::vector<double>& a,
                          const std::vector<double>& b, bool ta, bool tb) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double x = ta ? a[l * m + i] : a[i * k + l];
        const double y = tb ? b[j * k + l] : b[l * n + j];
        s += x * y;
      }
      c[i * n + j] = s;
    }
  return c;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  std::mt19937_64 rng(1);
  const KernelTable& s = scalar_table();
  for (auto [m, n, k] : std::vector<std::array<std::size_t, 3>>{{1, 1, 1}, {3, 5, 7}, {17, 9, 33}}) {
    const auto a = randv(m * k, rng);
    const auto b = randv(k * n, rng);
    std::vector<double> c(m * n, 0.0);
    s.gemm_nn(m, n, k, a.data(), b.data(), c.data());
    CHECK(max_rel(c, naive(m, n, k, a, b, false, false)) < 1e-12);
    std::fill(c.begin(), c.end(), 0.0);
    s.gemm_nt(m, n, k, a.data(), b.data(), c.data());
    CHECK(max_rel(c, naive(m, n, k, a, b, false, true)) < 1e-12);
    std::fill(c.begin(), c.end(), 0.0);
    s.gemm_tn(m, n, k, a.data(), b.data(), c.data());
    CHECK(max_rel(c, naive(m, n, k, a, b, true, false)) < 1e-12);
  }
  const auto x = randv(13, rng, 5.0);
  std::vector<double> y(13);
  s.vexp(13, x.data(), y.data());
  for (std::size_t i = 0; i < 13; ++i) CHECK(y[i] == std::exp(x[i]));
}

TEST_CASE("avx2 kernels are equivalent to the scalar reference") {
  const KernelTable* v = avx2_table();
  if (v == nullptr || !cpu_has_avx2()) {
    MESSAGE("AVX2 unavailable; equivalence not exercised");
    return;
  }
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(2);
  for (std::size_t n : {0UL, 1UL, 3UL, 4UL, 7UL, 8UL, 15UL, 64UL, 1001UL}) {
    const auto x = randv(n, rng);
    auto y1 = randv(n, rng);
    auto y2 = y1;
    s.axpy(n, 0.7, x.data(), y1.data());
    v->axpy(n, 0.7, x.data(), y2.data());
    CHECK(max_rel(y2, y1) < 1e-14);
    CHECK(std::abs(s.dot(n, x.data(), y1.data()) - v->dot(n, x.data(), y1.data())) <
          1e-12 * std::max<double>(1.0, static_cast<double>(n)));
  }
  for (auto [m, n, k] : std::vector<std::array<std::size_t, 3>>{
           {1, 1, 1}, {4, 8, 3}, {5, 9, 17}, {13, 31, 7}, {64, 64, 64}, {121, 121, 16}, {3, 130, 65}}) {
    const auto a = randv(m * k, rng);
    const auto b = randv(k * n, rng);
    const auto c0 = randv(m * n, rng);
    for (int which = 0; which < 3; ++which) {
      auto c1 = c0;
      auto c2 = c0;
      auto fs = which == 0 ? s.gemm_nn : which == 1 ? s.gemm_nt : s.gemm_tn;
      auto fv = which == 0 ? v->gemm_nn : which == 1 ? v->gemm_nt : v->gemm_tn;
      fs(m, n, k, a.data(), b.data(), c1.data());
      fv(m, n, k, a.data(), b.data(), c2.data());
      CHECK(max_rel(c2, c1) < 1e-12);
    }
  }
  std::vector<double> xs{-800.0, -708.5, -700.0, -30.0, -1.0, -1e-9, 0.0, 1e-9, 0.5, 1.0, 2.0, 20.0, 300.0, 700.0};
  const auto more = randv(1000, rng, 10.0);
  xs.insert(xs.end(), more.begin(), more.end());
  std::vector<double> e1(xs.size());
  std::vector<double> e2(xs.size());
  s.vexp(xs.size(), xs.data(), e1.data());
  v->vexp(xs.size(), xs.data(), e2.data());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (e1[i] < 1e-300) {
      CHECK(e2[i] < 1e-300);
    } else {
      CHECK(std::abs(e2[i] - e1[i]) / e1[i] < 1e-14);
    }
  }
}

TEST_CASE("backend selection and multiply counters") {
  const Backend before = active_backend();
  set_backend(Backend::kScalar);
  CHECK(active_backend() == Backend::kScalar);
  CHECK(backend_name(Backend::kScalar) == "scalar");
  reset_counts();
  std::vector<double> a(6, 1.0), b(12, 1.0), c(8, 0.0);
  gemm_nn(2, 4, 3, a.data(), b.data(), c.data());
  CHECK(counts().total == 24);
  CHECK(counts().attention == 0);
  {
    AttentionScope scope;
    gemm_nn(2, 4, 3, a.data(), b.data(), c.data());
  }
  {
    AttentionScope scope(false);
    gemm_nn(2, 4, 3, a.data(), b.data(), c.data());
  }
  CHECK(counts().total == 72);
  CHECK(counts().attention == 48);
  CHECK(counts().self_attention == 24);
  CHECK(c[0] == 9.0);  // gemm accumulates into c
  if (cpu_has_avx2() && avx2_table() != nullptr) set_backend(before);
}
