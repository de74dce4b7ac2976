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

#pragma once

// Dense double-precision inner loops used by the tensor layer.
//
// Each kernel has a portable scalar reference and an AVX2/FMA variant. The
// active table is chosen once at startup from CPUID and may be forced with
// the HNAV_SIMD environment variable ("scalar" or "avx2") or set_backend().
// All matrices are row-major and densely packed.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace hnav::kernels {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c);
  // y[i] = exp(x[i]); x and y may alias
  void (*vexp)(std::size_t n, const double* x, double* y);
};

const KernelTable& scalar_table();
// Returns nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool cpu_has_avx2();
Backend active_backend();
std::string_view backend_name(Backend b);
// Throws if the requested backend is unavailable on this machine.
void set_backend(Backend b);
const KernelTable& active();

inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
  active().axpy(n, alpha, x, y);
}
inline double dot(std::size_t n, const double* x, const double* y) {
  return active().dot(n, x, y);
}
inline void vexp(std::size_t n, const double* x, double* y) { active().vexp(n, x, y); }

// Multiply counters, per thread. An attention scope tags multiplies that
// belong to the token-by-token score and mixing products, split by whether
// queries and keys come from the same sequence.
struct MultiplyCounts {
  std::uint64_t total = 0;
  std::uint64_t attention = 0;        // self and cross
  std::uint64_t self_attention = 0;
};

MultiplyCounts& counts();
void reset_counts();
void count_multiplies(std::uint64_t n);

class AttentionScope {
 public:
  explicit AttentionScope(bool self = true);
  ~AttentionScope();
  AttentionScope(const AttentionScope&) = delete;
  AttentionScope& operator=(const AttentionScope&) = delete;

 private:
  int prev_;
};

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c);

}  // namespace hnav::kernels
