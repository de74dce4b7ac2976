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

#include <random>

#include "hnav/tensor.hpp"
#include "oracles.hpp"

using namespace hnav;
using namespace hnav::nn;

namespace {

Matrix randn(std::mt19937_64& rng, int r, int c, double s = 1.0) {
  std::normal_distribution<double> n(0.0, s);
  Matrix m(r, c);
  for (auto& v : m.data) v = n(rng);
  return m;
}

void expect_grads(ParameterStore& store, const std::function<Var()>& loss) {
  const auto r = oracle::check_gradients(store, loss);
  INFO("worst: " << r.worst);
  CHECK(r.checked > 0);
  CHECK(r.max_rel < 1e-5);
}

}  // namespace

TEST_CASE("matmul variants and elementwise ops") {
  std::mt19937_64 rng(1);
  ParameterStore s;
  Var a = s.add("a", randn(rng, 3, 4));
  Var b = s.add("b", randn(rng, 4, 5));
  Var c = s.add("c", randn(rng, 5, 4));
  Var r = s.add("r", randn(rng, 1, 5));
  expect_grads(s, [&] {
    Var ab = matmul(a, b);
    Var ac = matmul_nt(a, c);
    Var m = mul(add(ab, ac), sub(ab, scale(ac, 0.5)));
    return sum_all(add_row(m, r));
  });
  const Matrix ref = matmul(a, b).value();
  const Matrix alt = matmul_nt(a, transpose(b)).value();
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(ref.data[i] - alt.data[i]) < 1e-12);
}

TEST_CASE("nonlinearities and normalization") {
  std::mt19937_64 rng(2);
  ParameterStore s;
  Var x = s.add("x", randn(rng, 4, 6));
  Var g = s.add("g", randn(rng, 1, 6));
  Var b = s.add("b", randn(rng, 1, 6));
  Var w = s.add("w", randn(rng, 6, 3));
  expect_grads(s, [&] {
    Var h = layer_norm(gelu(x), g, b, 1e-5);
    Var p = softmax_rows(matmul(h, w));
    return sum_all(mul(p, matmul(sigmoid(h), w)));
  });
  expect_grads(s, [&] { return sum_all(one_minus(mean_rows(sigmoid(x)))); });
}

TEST_CASE("structural ops") {
  std::mt19937_64 rng(3);
  ParameterStore s;
  Var x = s.add("x", randn(rng, 4, 6));
  Var y = s.add("y", randn(rng, 2, 3));
  Var k = s.add("k", randn(rng, 1, 1));
  expect_grads(s, [&] {
    const int idx[] = {3, 0, 3};
    Var left = slice_cols(x, 1, 4);
    Var rows = gather_rows(left, idx);
    const Var stack[] = {rows, y};
    Var cat = concat_rows(stack);
    const Var side[] = {cat, transpose(slice_cols(x, 0, 5))};
    Var wide = concat_cols(side);
    return sum_all(mul_scalar(mul(wide, wide), k));
  });
}

TEST_CASE("losses and the scalar affine bias") {
  std::mt19937_64 rng(4);
  ParameterStore s;
  Var logits = s.add("logits", randn(rng, 4, 5));
  Var w = s.add("w", Matrix(1, 1, 0.7));
  Var b = s.add("b", Matrix(1, 1, -0.3));
  const std::vector<int> targets{2, -1, 0, 4};
  expect_grads(s, [&] { return cross_entropy(logits, targets); });
  Matrix t(4, 5);
  for (auto& v : t.data) v = static_cast<double>(rng() % 2);
  expect_grads(s, [&] { return bce_with_logits(logits, t); });
  Matrix d = randn(rng, 5, 5);
  std::vector<std::uint8_t> mask(25, 1);
  mask[0] = mask[7] = 0;
  expect_grads(s, [&] { return sum_all(mul(softmax_rows(add(logits, gather_rows(scalar_affine(d, mask, w, b), std::vector<int>{0, 1, 2, 3}))), logits)); });
  const Matrix out = scalar_affine(d, mask, w, b).value();
  CHECK(out.data[0] == 0.0);
  CHECK(out.data[1] == doctest::Approx(0.7 * d.data[1] - 0.3));

  // Uniform logits give ln C.
  Var flat = constant(Matrix(3, 7, 0.25));
  CHECK(cross_entropy(flat, std::vector<int>{0, 3, 6}).item() == doctest::Approx(std::log(7.0)));
  CHECK(cross_entropy(flat, std::vector<int>{-1, -1, -1}).item() == 0.0);
  CHECK(bce_with_logits(constant(Matrix(2, 2, 0.0)), Matrix(2, 2, 1.0)).item() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("layer norm statistics and softmax stability") {
  std::mt19937_64 rng(5);
  Var x = constant(randn(rng, 5, 16, 30.0));
  Matrix y = layer_norm(x, constant(Matrix(1, 16, 1.0)), constant(Matrix(1, 16, 0.0))).value();
  for (int r = 0; r < 5; ++r) {
    double mean = 0, var = 0;
    for (int c = 0; c < 16; ++c) mean += y(r, c) / 16;
    for (int c = 0; c < 16; ++c) var += (y(r, c) - mean) * (y(r, c) - mean) / 16;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - 1.0) < 1e-9);
  }
  Matrix big(1, 3, std::vector<double>{1000.0, 999.0, -1e9});
  Matrix p = softmax_rows(constant(big)).value();
  CHECK(p.all_finite());
  CHECK(p(0, 2) == 0.0);
  CHECK(p(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("no-grad guard and shape errors") {
  ParameterStore s;
  Var a = s.add("a", Matrix(2, 2, 1.0));
  {
    NoGradGuard g;
    CHECK_FALSE(grad_enabled());
    Var y = matmul(a, a);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(grad_enabled());
  CHECK(matmul(a, a).requires_grad());
  CHECK_THROWS_AS(matmul(a, constant(Matrix(3, 1))), DimensionError);
  CHECK_THROWS_AS(add(a, constant(Matrix(2, 3))), DimensionError);
  CHECK_THROWS_AS(a.item(), DimensionError);
  CHECK(s.scalar_count() == 4);
  CHECK(s.find("a").node() == a.node());
}
