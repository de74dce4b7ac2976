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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hnav/kernels.hpp"

namespace hnav::kernels {

#ifndef HNAV_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend initial_backend() {
  const bool avx2_ok = cpu_has_avx2() && avx2_table() != nullptr;
  if (const char* env = std::getenv("HNAV_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::kScalar;
    if (v == "avx2" && avx2_ok) return Backend::kAvx2;
  }
  return avx2_ok ? Backend::kAvx2 : Backend::kScalar;
}

Backend& backend_slot() {
  static Backend b = initial_backend();
  return b;
}

const KernelTable*& table_slot() {
  static const KernelTable* t =
      backend_slot() == Backend::kAvx2 ? avx2_table() : &scalar_table();
  return t;
}

thread_local MultiplyCounts tl_counts;
thread_local int tl_scope = 0;  // 0 none, 1 cross, 2 self

}  // namespace

Backend active_backend() { return backend_slot(); }

std::string_view backend_name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) {
  if (b == Backend::kAvx2) {
    if (!cpu_has_avx2() || avx2_table() == nullptr) {
      throw std::runtime_error("AVX2 backend unavailable on this machine");
    }
    table_slot() = avx2_table();
  } else {
    table_slot() = &scalar_table();
  }
  backend_slot() = b;
}

const KernelTable& active() { return *table_slot(); }

MultiplyCounts& counts() { return tl_counts; }
void reset_counts() { tl_counts = {}; }
void count_multiplies(std::uint64_t n) {
  tl_counts.total += n;
  if (tl_scope > 0) tl_counts.attention += n;
  if (tl_scope == 2) tl_counts.self_attention += n;
}

AttentionScope::AttentionScope(bool self) : prev_(tl_scope) { tl_scope = self ? 2 : 1; }
AttentionScope::~AttentionScope() { tl_scope = prev_; }

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  count_multiplies(static_cast<std::uint64_t>(m) * n * k);
  active().gemm_nn(m, n, k, a, b, c);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  count_multiplies(static_cast<std::uint64_t>(m) * n * k);
  active().gemm_nt(m, n, k, a, b, c);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  count_multiplies(static_cast<std::uint64_t>(m) * n * k);
  active().gemm_tn(m, n, k, a, b, c);
}

}  // namespace hnav::kernels
