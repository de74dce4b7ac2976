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

#include "hnav/encoders.hpp"
#include "hnav/tensor.hpp"
#include "oracles.hpp"

using namespace hnav;
using nn::Matrix;
using nn::Var;

namespace {

EncoderConfig small(int dim = 16, int heads = 2) {
  EncoderConfig c;
  c.dim = dim;
  c.heads = heads;
  c.text_layers = 1;
  c.pano_layers = 1;
  c.long_layers = 2;
  c.short_layers = 1;
  c.vocab_size = 12;
  c.max_len = 10;
  c.view_dim = 6;
  c.num_classes = 4;
  c.max_step = 8;
  c.init_std = 0.3;  // larger weights keep the oracle comparison non-trivial
  return c;
}

std::vector<NodeEmbeddingInput> random_nodes(std::mt19937_64& rng, int n, int dim) {
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<NodeEmbeddingInput> nodes(static_cast<std::size_t>(n));
  nodes[0].kind = NodeKind::kStop;
  for (int i = 1; i < n; ++i) {
    auto& x = nodes[static_cast<std::size_t>(i)];
    x.feature.resize(static_cast<std::size_t>(dim));
    for (auto& v : x.feature) v = g(rng);
    x.rel_heading = u(rng);
    x.rel_distance = std::abs(u(rng));
    x.step = i;
    x.kind = i == 1 ? NodeKind::kCurrent : (i % 2 ? NodeKind::kVisited : NodeKind::kUnexplored);
  }
  return nodes;
}

Matrix random_affinity(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.5, 6);
  Matrix a(n, n);
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

MetricMap random_map(std::mt19937_64& rng, MapSpec spec, int dim) {
  std::normal_distribution<double> g(0, 1);
  MetricMap m(spec, dim);
  for (std::size_t c = 0; c < spec.cells(); ++c) {
    if (rng() % 4 == 0) continue;
    m.observed[c] = 1;
    m.counts[c] = 1;
    for (int k = 0; k < dim; ++k) m.features[c * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] = g(rng);
    m.navigable[c] = rng() % 3 == 0;
    m.masked[c] = rng() % 5 == 0;
  }
  return m;
}

double diff(const Matrix& a, const Matrix& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace

TEST_CASE("attention matches the per-head oracle") {
  std::mt19937_64 rng(1);
  Encoders enc(small(), 3);
  const oracle::Params P{enc};
  std::normal_distribution<double> g(0, 1);
  Matrix xq(5, 16), xkv(7, 16), bias(5, 7);
  for (auto* m : {&xq, &xkv, &bias})
    for (auto& v : m->data) v = g(rng);
  Var b = nn::constant(bias);
  for (int heads : {1, 2, 4}) {
    const Var out = nn::attention(enc.long_layer(0).vis_self, nn::constant(xq), nn::constant(xkv), &b, heads);
    const oracle::Mat ob = oracle::from(bias);
    const auto ref = oracle::attention(P, "long.layer0.vis_self", oracle::from(xq), oracle::from(xkv), &ob, heads);
    CHECK(oracle::max_abs_diff(ref, out.value()) < 1e-10);
  }
}

TEST_CASE("a -1e9 bias removes keys") {
  std::mt19937_64 rng(2);
  Encoders enc(small(), 3);
  std::normal_distribution<double> g(0, 1);
  Matrix xq(3, 16), xkv(6, 16);
  for (auto* m : {&xq, &xkv})
    for (auto& v : m->data) v = g(rng);
  Matrix bias(3, 6);
  const std::vector<int> keep{0, 2, 5};
  for (int r = 0; r < 3; ++r)
    for (int c : {1, 3, 4}) bias(r, c) = -1e9;
  Var b = nn::constant(bias);
  const auto& p = enc.long_layer(0).vis_self;
  const Var masked = nn::attention(p, nn::constant(xq), nn::constant(xkv), &b, 2);
  const Var sub = nn::attention(p, nn::constant(xq), nn::gather_rows(nn::constant(xkv), keep), nullptr, 2);
  CHECK(diff(masked.value(), sub.value()) < 1e-12);
}

TEST_CASE("zero-initialized graph bias is an identity") {
  std::mt19937_64 rng(3);
  Encoders enc(small(), 4);
  const std::vector<int> tokens{1, 4, 7, 2, 9};
  const Var text = enc.text_encode(tokens);
  const auto nodes = random_nodes(rng, 6, 16);
  const Matrix aff = random_affinity(rng, 6);
  const auto with = enc.long_term_encode(nodes, text, aff);
  const auto without = enc.long_term_encode(nodes, text, Matrix(6, 6));
  CHECK(diff(with.nodes.value(), without.nodes.value()) < 1e-12);
  CHECK(diff(with.text.value(), without.text.value()) < 1e-12);

  // Once the scale is non-zero, distances shift the result and match the oracle.
  enc.long_layer(0).gasa_w.mutable_value()(0, 0) = -0.8;
  enc.long_layer(1).gasa_b.mutable_value()(0, 0) = 0.4;
  const auto biased = enc.long_term_encode(nodes, text, aff);
  CHECK(diff(biased.nodes.value(), without.nodes.value()) > 1e-6);

  const oracle::Params P{enc};
  oracle::Mat x = oracle::from(enc.node_embeddings(nodes).value());
  oracle::Mat t = oracle::from(text.value());
  for (int l = 0; l < 2; ++l) {
    const double w = enc.long_layer(l).gasa_w.value()(0, 0);
    const double b = enc.long_layer(l).gasa_b.value()(0, 0);
    oracle::Mat bias = oracle::zeros(6, 6);
    for (int i = 1; i < 6; ++i)
      for (int j = 1; j < 6; ++j) bias[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = w * aff(i, j) + b;
    std::tie(x, t) = oracle::cross_layer(P, "long.layer" + std::to_string(l), x, t, &bias, 2);
  }
  CHECK(oracle::max_abs_diff(x, biased.nodes.value()) < 1e-9);
  CHECK(oracle::max_abs_diff(t, biased.text.value()) < 1e-9);
}

TEST_CASE("post-norm outputs are standardized per token") {
  Encoders enc(small(32, 4), 5);
  const std::vector<int> tokens{3, 3, 8, 1, 0, 11};
  const auto layers = enc.text_layer_outputs(tokens);
  REQUIRE(layers.size() == 2);
  for (const Matrix& m : layers) {
    for (int r = 0; r < m.rows; ++r) {
      double mean = 0, var = 0;
      for (int c = 0; c < m.cols; ++c) mean += m(r, c) / m.cols;
      for (int c = 0; c < m.cols; ++c) var += (m(r, c) - mean) * (m(r, c) - mean) / m.cols;
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(var - 1.0) < 1e-6);
    }
  }
  CHECK(diff(layers.back(), enc.text_encode(tokens).value()) < 1e-12);
}

TEST_CASE("short-term branch on a 3x3 map matches the dense oracle") {
  std::mt19937_64 rng(6);
  Encoders enc(small(), 7);
  MapSpec spec{3, 3, 0.5, -0.5, 2.5};
  const MetricMap map = random_map(rng, spec, 6);
  const std::vector<int> tokens{2, 5, 6};
  const Var text = enc.text_encode(tokens);
  const auto out = enc.short_term_encode(map, text);
  CHECK(out.center_index == 4);
  const auto [cells, t] = oracle::short_term(enc, map, oracle::from(text.value()));
  CHECK(oracle::max_abs_diff(cells, out.cells.value()) < 1e-9);
  CHECK(oracle::max_abs_diff(t, out.text.value()) < 1e-9);

  MetricMap wrong(spec, 5);
  CHECK_THROWS_AS(enc.short_term_encode(wrong, text), DimensionError);
}

TEST_CASE("panorama encoder is permutation equivariant over views") {
  std::mt19937_64 rng(8);
  Encoders enc(small(), 9);
  std::normal_distribution<double> g(0, 1);
  Matrix f(4, 6), a(4, 2);
  for (auto& v : f.data) v = g(rng);
  for (int k = 0; k < 4; ++k) a(k, 0) = k * M_PI / 2;
  const Matrix out = enc.pano_encode(f, a).value();
  Matrix fp(4, 6), ap(4, 2);
  const int perm[] = {2, 0, 3, 1};
  for (int k = 0; k < 4; ++k) {
    std::copy(f.row(perm[k]), f.row(perm[k]) + 6, fp.row(k));
    ap(k, 0) = a(perm[k], 0);
  }
  const Matrix op = enc.pano_encode(fp, ap).value();
  for (int k = 0; k < 4; ++k)
    for (int c = 0; c < 16; ++c) CHECK(std::abs(op(k, c) - out(perm[k], c)) < 1e-12);
  CHECK_THROWS_AS(enc.pano_encode(Matrix(4, 5), a), DimensionError);
}

TEST_CASE("encoder gradients match central differences") {
  std::mt19937_64 rng(10);
  EncoderConfig cfg = small(8, 2);
  cfg.init_std = 0.5;
  Encoders enc(cfg, 11);
  // Non-zero graph bias so its gradient path is exercised.
  for (int l = 0; l < 2; ++l) {
    enc.long_layer(l).gasa_w.mutable_value()(0, 0) = 0.3;
    enc.long_layer(l).gasa_b.mutable_value()(0, 0) = -0.2;
  }
  const auto nodes = random_nodes(rng, 4, 8);
  const Matrix aff = random_affinity(rng, 4);
  const MetricMap map = random_map(rng, MapSpec{3, 3, 0.5, -0.5, 2.5}, 6);
  const std::vector<int> tokens{1, 2, 3, 4};
  Matrix views(3, 6), angles(3, 2);
  std::normal_distribution<double> g(0, 1);
  for (auto& v : views.data) v = g(rng);
  auto loss = [&] {
    const Var text = enc.text_encode(tokens);
    const auto lt = enc.long_term_encode(nodes, text, aff);
    const auto st = enc.short_term_encode(map, text);
    const Var ns = enc.node_scores(lt.nodes);
    const Var cs = enc.cell_scores(st.cells);
    const Var gate = enc.fusion_gate(nn::gather_rows(lt.nodes, std::vector<int>{0}),
                                     nn::gather_rows(st.cells, std::vector<int>{st.center_index}));
    Var l = nn::add(nn::cross_entropy(nn::transpose(ns), std::vector<int>{2}), nn::mul(gate, gate));
    l = nn::add(l, nn::cross_entropy(enc.word_logits(text), std::vector<int>{5, -1, 0, 7}));
    l = nn::add(l, nn::bce_with_logits(enc.semantic_logits(st.cells), Matrix(9, 4, 0.5)));
    l = nn::add(l, nn::scale(nn::sum_all(cs), 0.1));
    return nn::add(l, nn::scale(nn::sum_all(enc.pano_encode(views, angles)), 0.01));
  };
  const auto r = oracle::check_gradients(enc.params(), loss, 6);
  INFO("worst: " << r.worst);
  CHECK(r.checked > 500);
  CHECK(r.max_rel < 1e-4);
}
