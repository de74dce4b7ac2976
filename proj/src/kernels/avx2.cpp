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

// Compiled with -mavx2 -mfma. Only reached through the dispatch table after
// a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <vector>

#include "hnav/kernels.hpp"

namespace hnav::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// exp(x) = 2^n * exp(r), r = x - n ln2 in [-ln2/2, ln2/2], Taylor series
// to degree 13 (truncation below 2e-16 relative).
void vexp_avx2(std::size_t n, const double* x, double* y) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d zero = _mm256_setzero_pd();
  static const double kCoef[14] = {1.0,
                                   1.0,
                                   1.0 / 2,
                                   1.0 / 6,
                                   1.0 / 24,
                                   1.0 / 120,
                                   1.0 / 720,
                                   1.0 / 5040,
                                   1.0 / 40320,
                                   1.0 / 362880,
                                   1.0 / 3628800,
                                   1.0 / 39916800,
                                   1.0 / 479001600,
                                   1.0 / 6227020800};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xin = _mm256_loadu_pd(x + i);
    const __m256d under = _mm256_cmp_pd(xin, lo, _CMP_LT_OQ);
    const __m256d xv = _mm256_min_pd(_mm256_max_pd(xin, lo), hi);
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(xv, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, xv);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);
    __m256d p = _mm256_set1_pd(kCoef[13]);
    for (int c = 12; c >= 0; --c) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kCoef[c]));
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    __m256i bits = _mm256_cvtepi32_epi64(k32);
    bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
    const __m256d v = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    _mm256_storeu_pd(y + i, _mm256_blendv_pd(v, zero, under));
  }
  for (; i < n; ++i) y[i] = std::exp(x[i]);
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                         _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

// 4 x 8 register tile of C accumulated over the full k extent.
inline void tile_4x8(std::size_t k, std::size_t n, const double* a, std::size_t lda,
                     const double* b, double* c) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * n);
    const __m256d b1 = _mm256_loadu_pd(b + p * n + 4);
    __m256d av = _mm256_broadcast_sd(a + p);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(a + lda + p);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(a + 2 * lda + p);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(a + 3 * lda + p);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  auto flush = [](double* row, __m256d lo, __m256d hi) {
    _mm256_storeu_pd(row, _mm256_add_pd(_mm256_loadu_pd(row), lo));
    _mm256_storeu_pd(row + 4, _mm256_add_pd(_mm256_loadu_pd(row + 4), hi));
  };
  flush(c, c00, c01);
  flush(c + n, c10, c11);
  flush(c + 2 * n, c20, c21);
  flush(c + 3 * n, c30, c31);
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c) {
  const std::size_t n8 = n - n % 8;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    for (std::size_t j = 0; j < n8; j += 8) tile_4x8(k, n, a + i * k, k, b + j, c + i * n + j);
  }
  // Row remainder over the tiled columns, then the column remainder.
  for (std::size_t r = i; r < m; ++r) {
    for (std::size_t p = 0; p < k; ++p) axpy_avx2(n8, a[r * k + p], b + p * n, c + r * n);
  }
  if (n8 < n) {
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t p = 0; p < k; ++p) {
        const double av = a[r * k + p];
        for (std::size_t j = n8; j < n; ++j) c[r * n + j] += av * b[p * n + j];
      }
    }
  }
}

std::vector<double> transposed(std::size_t rows, std::size_t cols, const double* x) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t q = 0; q < cols; ++q) t[q * rows + r] = x[r * cols + q];
  }
  return t;
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c) {
  const std::vector<double> bt = transposed(n, k, b);
  gemm_nn_avx2(m, n, k, a, bt.data(), c);
}

void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c) {
  const std::vector<double> at = transposed(k, m, a);
  gemm_nn_avx2(m, n, k, at.data(), b, c);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{axpy_avx2, dot_avx2, gemm_nn_avx2,
                                 gemm_nt_avx2, gemm_tn_avx2, vexp_avx2};
  return &table;
}

}  // namespace hnav::kernels
