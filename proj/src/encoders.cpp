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

#include "hnav/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hnav/kernels.hpp"
#include "hnav/metric_map.hpp"

namespace hnav {

void EncoderConfig::validate() const {
  if (dim <= 0 || heads <= 0 || dim % heads != 0) {
    throw DimensionError("dim must be a positive multiple of heads");
  }
  if (text_layers < 0 || pano_layers < 0 || long_layers < 0 || short_layers < 0) {
    throw DimensionError("layer counts must be non-negative");
  }
  if (vocab_size < 2 || max_len < 1 || ffn_mult < 1 || view_dim < 1) {
    throw DimensionError("invalid encoder sizes");
  }
  if (num_classes < 1 || num_classes > kMaxSemanticClasses) {
    throw DimensionError("num_classes must lie in [1, 64]");
  }
  if (max_step < 1) throw DimensionError("max_step must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw DimensionError("dropout must lie in [0, 1)");
}

namespace nn {

Var Linear::operator()(const Var& x) const { return add_row(matmul(x, weight), bias); }

Var LayerNormParams::operator()(const Var& x) const { return layer_norm(x, gamma, beta); }

Var ScoreHead::operator()(const Var& x) const { return out(gelu(hidden(x))); }

Var attention(const AttentionParams& p, const Var& xq, const Var& xkv, const Var* bias,
              int heads) {
  const int dim = p.q.weight.cols();
  if (xq.cols() != p.q.weight.rows() || xkv.cols() != p.k.weight.rows()) {
    throw DimensionError("attention input width does not match projections");
  }
  if (dim % heads != 0) throw DimensionError("attention width not divisible by heads");
  if (bias != nullptr && (bias->rows() != xq.rows() || bias->cols() != xkv.rows())) {
    throw DimensionError("attention bias must be len_q x len_kv");
  }
  const int dh = dim / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool self = xq.node() == xkv.node();
  Var q = p.q(xq);
  Var k = p.k(xkv);
  Var v = p.v(xkv);
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Var qh = heads == 1 ? q : slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = heads == 1 ? k : slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = heads == 1 ? v : slice_cols(v, h * dh, (h + 1) * dh);
    Var scores;
    {
      kernels::AttentionScope scope(self);
      scores = matmul_nt(scale(qh, inv_scale), kh);
    }
    if (bias != nullptr) scores = add(scores, *bias);
    Var probs = softmax_rows(scores);
    kernels::AttentionScope scope(self);
    outs.push_back(matmul(probs, vh));
  }
  Var merged = heads == 1 ? outs[0] : concat_cols(outs);
  return p.o(merged);
}

Var gasa_bias(const Matrix& affinity, std::span<const std::uint8_t> stop_mask, const Var& w,
              const Var& b) {
  if (affinity.rows != affinity.cols) throw DimensionError("affinity must be square");
  if (stop_mask.size() != static_cast<std::size_t>(affinity.rows)) {
    throw DimensionError("stop mask length mismatch");
  }
  const int n = affinity.rows;
  std::vector<std::uint8_t> mask(affinity.size(), 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (stop_mask[static_cast<std::size_t>(i)] || stop_mask[static_cast<std::size_t>(j)]) {
        mask[static_cast<std::size_t>(i) * n + j] = 0;
      }
    }
  }
  return scalar_affine(affinity, mask, w, b);
}

Var dropout(const Var& x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  Matrix m(x.rows(), x.cols());
  for (auto& v : m.data) v = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return mul(x, constant(std::move(m)));
}

}  // namespace nn

using nn::Matrix;
using nn::Var;

Encoders::Encoders(const EncoderConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed), dropout_rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
  cfg_.validate();
  const int d = cfg_.dim;
  tok_emb_ = embed_table("text.tok_emb", cfg_.vocab_size, d);
  pos_emb_ = embed_table("text.pos_emb", cfg_.max_len, d);
  type_emb_ = embed_table("text.type_emb", 1, d);
  ln_text_emb_ = make_ln("text.emb_ln", d);
  for (int i = 0; i < cfg_.text_layers; ++i) {
    text_blocks_.push_back(make_self_block("text.layer" + std::to_string(i)));
  }

  view_proj_ = make_linear("pano.view_proj", cfg_.view_dim, d);
  angle_proj_ = make_linear("pano.angle_proj", 4, d);
  ln_pano_emb_ = make_ln("pano.emb_ln", d);
  for (int i = 0; i < cfg_.pano_layers; ++i) {
    pano_blocks_.push_back(make_self_block("pano.layer" + std::to_string(i)));
  }

  loc_proj_ = make_linear("node.loc_proj", 3, d);
  step_emb_ = embed_table("node.step_emb", cfg_.max_step + 1, d);
  ln_node_emb_ = make_ln("node.emb_ln", d);
  for (int i = 0; i < cfg_.long_layers; ++i) {
    long_layers_.push_back(make_cross_layer("long.layer" + std::to_string(i)));
  }

  cell_proj_ = make_linear("cell.feat_proj", cfg_.view_dim, d);
  polar_proj_ = make_linear("cell.polar_proj", 3, d);
  nav_proj_ = make_linear("cell.nav_proj", 1, d);
  cell_mask_emb_ = embed_table("cell.mask_emb", 1, d);
  ln_cell_emb_ = make_ln("cell.emb_ln", d);
  for (int i = 0; i < cfg_.short_layers; ++i) {
    short_layers_.push_back(make_cross_layer("short.layer" + std::to_string(i)));
  }

  word_hidden_ = make_linear("head.word.hidden", d, d);
  word_ln_ = make_ln("head.word.ln", d);
  word_out_ = make_linear("head.word.out", d, cfg_.vocab_size);
  node_head_ = {make_linear("head.node.hidden", d, d), make_linear("head.node.out", d, 1)};
  cell_head_ = {make_linear("head.cell.hidden", d, d), make_linear("head.cell.out", d, 1)};
  gate_head_ = {make_linear("head.gate.hidden", 2 * d, d), make_linear("head.gate.out", d, 1)};
  semantic_head_ = {make_linear("head.semantic.hidden", d, d),
                    make_linear("head.semantic.out", d, cfg_.num_classes)};
}

Var Encoders::embed_table(const std::string& name, int rows, int cols) {
  std::normal_distribution<double> dist(0.0, cfg_.init_std);
  Matrix m(rows, cols);
  for (auto& x : m.data) x = dist(rng_);
  return store_.add(name, std::move(m));
}

nn::Linear Encoders::make_linear(const std::string& name, int in, int out) {
  nn::Linear l;
  l.weight = embed_table(name + ".weight", in, out);
  l.bias = store_.add(name + ".bias", Matrix(1, out, 0.0));
  return l;
}

nn::LayerNormParams Encoders::make_ln(const std::string& name, int n) {
  return {store_.add(name + ".gamma", Matrix(1, n, 1.0)),
          store_.add(name + ".beta", Matrix(1, n, 0.0))};
}

nn::AttentionParams Encoders::make_attn(const std::string& name) {
  const int d = cfg_.dim;
  return {make_linear(name + ".q", d, d), make_linear(name + ".k", d, d),
          make_linear(name + ".v", d, d), make_linear(name + ".o", d, d)};
}

nn::FeedForward Encoders::make_ffn(const std::string& name) {
  const int d = cfg_.dim;
  return {make_linear(name + ".up", d, d * cfg_.ffn_mult),
          make_linear(name + ".down", d * cfg_.ffn_mult, d)};
}

nn::SelfBlock Encoders::make_self_block(const std::string& name) {
  nn::SelfBlock b;
  b.attn = make_attn(name + ".attn");
  b.ln_attn = make_ln(name + ".attn_ln", cfg_.dim);
  b.ffn = make_ffn(name + ".ffn");
  b.ln_ffn = make_ln(name + ".ffn_ln", cfg_.dim);
  return b;
}

nn::CrossLayer Encoders::make_cross_layer(const std::string& name) {
  nn::CrossLayer l;
  l.vis_cross = make_attn(name + ".vis_cross");
  l.text_cross = make_attn(name + ".text_cross");
  l.vis_self = make_attn(name + ".vis_self");
  l.text_self = make_attn(name + ".text_self");
  l.ln_vis_cross = make_ln(name + ".vis_cross_ln", cfg_.dim);
  l.ln_text_cross = make_ln(name + ".text_cross_ln", cfg_.dim);
  l.ln_vis_self = make_ln(name + ".vis_self_ln", cfg_.dim);
  l.ln_text_self = make_ln(name + ".text_self_ln", cfg_.dim);
  l.vis_ffn = make_ffn(name + ".vis_ffn");
  l.text_ffn = make_ffn(name + ".text_ffn");
  l.ln_vis_ffn = make_ln(name + ".vis_ffn_ln", cfg_.dim);
  l.ln_text_ffn = make_ln(name + ".text_ffn_ln", cfg_.dim);
  l.gasa_w = store_.add(name + ".gasa_w", Matrix(1, 1, 0.0));
  l.gasa_b = store_.add(name + ".gasa_b", Matrix(1, 1, 0.0));
  return l;
}

Var Encoders::drop(const Var& x) {
  if (!training_ || cfg_.dropout <= 0.0) return x;
  return nn::dropout(x, cfg_.dropout, dropout_rng_);
}

Var Encoders::run_ffn(const nn::FeedForward& f, const Var& x) {
  return f.down(nn::gelu(f.up(x)));
}

Var Encoders::run_self_block(const nn::SelfBlock& b, const Var& x) {
  Var h = b.ln_attn(nn::add(x, drop(nn::attention(b.attn, x, x, nullptr, cfg_.heads))));
  return b.ln_ffn(nn::add(h, drop(run_ffn(b.ffn, h))));
}

std::pair<Var, Var> Encoders::run_cross_layer(const nn::CrossLayer& layer, const Var& vis,
                                              const Var& text, const Var* vis_bias) {
  const int heads = cfg_.heads;
  const bool has_text = text.rows() > 0;
  Var v = vis;
  Var t = text;
  if (has_text) {
    v = layer.ln_vis_cross(
        nn::add(vis, drop(nn::attention(layer.vis_cross, vis, text, nullptr, heads))));
    t = layer.ln_text_cross(
        nn::add(text, drop(nn::attention(layer.text_cross, text, vis, nullptr, heads))));
  }
  v = layer.ln_vis_self(nn::add(v, drop(nn::attention(layer.vis_self, v, v, vis_bias, heads))));
  v = layer.ln_vis_ffn(nn::add(v, drop(run_ffn(layer.vis_ffn, v))));
  if (has_text) {
    t = layer.ln_text_self(
        nn::add(t, drop(nn::attention(layer.text_self, t, t, nullptr, heads))));
    t = layer.ln_text_ffn(nn::add(t, drop(run_ffn(layer.text_ffn, t))));
  }
  return {v, t};
}

Var Encoders::text_encode(std::span<const int> tokens) {
  const int len = static_cast<int>(tokens.size());
  if (len == 0) return nn::constant(Matrix(0, cfg_.dim));
  if (len > cfg_.max_len) {
    throw DimensionError("instruction length " + std::to_string(len) + " exceeds max_len " +
                         std::to_string(cfg_.max_len));
  }
  std::vector<int> ids(tokens.begin(), tokens.end());
  for (int id : ids) {
    if (id < 0 || id >= cfg_.vocab_size) {
      throw VocabError("token id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(cfg_.vocab_size));
    }
  }
  std::vector<int> positions(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) positions[static_cast<std::size_t>(i)] = i;
  Var x = nn::add(nn::gather_rows(tok_emb_, ids), nn::gather_rows(pos_emb_, positions));
  x = nn::add_row(x, type_emb_);
  x = drop(ln_text_emb_(x));
  for (const auto& b : text_blocks_) x = run_self_block(b, x);
  return x;
}

std::vector<Matrix> Encoders::text_layer_outputs(std::span<const int> tokens) {
  nn::NoGradGuard guard;
  std::vector<Matrix> out;
  const int len = static_cast<int>(tokens.size());
  if (len == 0) return out;
  std::vector<int> ids(tokens.begin(), tokens.end());
  std::vector<int> positions(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) positions[static_cast<std::size_t>(i)] = i;
  Var x = nn::add(nn::gather_rows(tok_emb_, ids), nn::gather_rows(pos_emb_, positions));
  x = ln_text_emb_(nn::add_row(x, type_emb_));
  out.push_back(x.value());
  for (const auto& b : text_blocks_) {
    x = run_self_block(b, x);
    out.push_back(x.value());
  }
  return out;
}

Var Encoders::pano_encode(const Matrix& view_features, const Matrix& view_angles) {
  if (view_features.rows < 1) throw DimensionError("panorama needs at least one view");
  if (view_features.cols != cfg_.view_dim) throw DimensionError("view feature width mismatch");
  if (view_angles.rows != view_features.rows || view_angles.cols != 2) {
    throw DimensionError("view angles must be K x 2");
  }
  Matrix ang(view_angles.rows, 4);
  for (int r = 0; r < ang.rows; ++r) {
    ang(r, 0) = std::sin(view_angles(r, 0));
    ang(r, 1) = std::cos(view_angles(r, 0));
    ang(r, 2) = std::sin(view_angles(r, 1));
    ang(r, 3) = std::cos(view_angles(r, 1));
  }
  return pano_encode_vars(nn::constant(view_features), nn::constant(std::move(ang)));
}

Var Encoders::pano_encode_vars(const Var& view_features, const Var& angle_encoding) {
  Var x = nn::add(view_proj_(view_features), angle_proj_(angle_encoding));
  x = drop(ln_pano_emb_(x));
  for (const auto& b : pano_blocks_) x = run_self_block(b, x);
  return x;
}

Var Encoders::node_embeddings(std::span<const NodeEmbeddingInput> nodes) {
  const int n = static_cast<int>(nodes.size());
  const int d = cfg_.dim;
  Matrix feats(n, d);
  Matrix loc(n, 3);
  std::vector<int> steps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& in = nodes[static_cast<std::size_t>(i)];
    if (in.kind != NodeKind::kStop) {
      if (in.feature.size() != static_cast<std::size_t>(d)) {
        throw DimensionError("node feature width mismatch");
      }
      std::copy(in.feature.begin(), in.feature.end(), feats.row(i));
      loc(i, 0) = std::sin(in.rel_heading);
      loc(i, 1) = std::cos(in.rel_heading);
      loc(i, 2) = in.rel_distance / 10.0;
    }
    steps[static_cast<std::size_t>(i)] =
        in.kind == NodeKind::kStop ? 0 : std::clamp(in.step, 0, cfg_.max_step);
  }
  Var x = nn::add(nn::constant(std::move(feats)), loc_proj_(nn::constant(std::move(loc))));
  x = nn::add(x, nn::gather_rows(step_emb_, steps));
  return drop(ln_node_emb_(x));
}

LongTermOutput Encoders::long_term_encode(std::span<const NodeEmbeddingInput> nodes,
                                          const Var& text, const Matrix& affinity) {
  const int n = static_cast<int>(nodes.size());
  if (n < 1) throw DimensionError("long-term encoder needs at least the stop node");
  if (affinity.rows != n || affinity.cols != n) {
    throw DimensionError("affinity must be N x N");
  }
  std::vector<std::uint8_t> stop_mask(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    stop_mask[static_cast<std::size_t>(i)] = nodes[static_cast<std::size_t>(i)].kind == NodeKind::kStop;
  }
  Var x = node_embeddings(nodes);
  Var t = text;
  for (const auto& layer : long_layers_) {
    Var bias = nn::gasa_bias(affinity, stop_mask, layer.gasa_w, layer.gasa_b);
    std::tie(x, t) = run_cross_layer(layer, x, t, &bias);
  }
  return {x, t};
}

Var Encoders::cell_embeddings(const MetricMap& map) {
  const MapSpec& spec = map.spec;
  const int cells = static_cast<int>(spec.cells());
  if (map.feature_dim != cfg_.view_dim && !(map.feature_dim == 0 && map.observed_count() == 0)) {
    throw DimensionError("metric map feature width does not match view_dim");
  }
  Matrix feats(cells, cfg_.view_dim);
  Matrix polar(cells, 3);
  Matrix nav(cells, 1);
  Matrix keep(cells, cfg_.dim, 1.0);
  Matrix masked(cells, 1);
  for (int u = 0; u < spec.u; ++u) {
    for (int v = 0; v < spec.v; ++v) {
      const int idx = static_cast<int>(spec.index(u, v));
      if (map.feature_dim == cfg_.view_dim) {
        const auto f = map.feature(u, v);
        std::copy(f.begin(), f.end(), feats.row(idx));
      }
      const auto p = polar_embedding(u, v, spec);
      polar(idx, 0) = p[0];
      polar(idx, 1) = p[1];
      polar(idx, 2) = p[2];
      nav(idx, 0) = map.navigable[static_cast<std::size_t>(idx)] ? 1.0 : 0.0;
      if (map.masked[static_cast<std::size_t>(idx)]) {
        masked(idx, 0) = 1.0;
        std::fill_n(keep.row(idx), cfg_.dim, 0.0);
      }
    }
  }
  Var x = nn::mul(cell_proj_(nn::constant(std::move(feats))), nn::constant(std::move(keep)));
  x = nn::add(x, nn::matmul(nn::constant(std::move(masked)), cell_mask_emb_));
  x = nn::add(x, polar_proj_(nn::constant(std::move(polar))));
  x = nn::add(x, nav_proj_(nn::constant(std::move(nav))));
  return drop(ln_cell_emb_(x));
}

ShortTermOutput Encoders::short_term_encode(const MetricMap& map, const Var& text) {
  Var x = cell_embeddings(map);
  Var t = text;
  for (const auto& layer : short_layers_) std::tie(x, t) = run_cross_layer(layer, x, t, nullptr);
  return {x, t, static_cast<int>(map.spec.index(map.spec.center_u(), map.spec.center_v()))};
}

Var Encoders::word_logits(const Var& text_reps) {
  return word_out_(word_ln_(nn::gelu(word_hidden_(text_reps))));
}

Var Encoders::node_scores(const Var& node_reps) { return node_head_(node_reps); }

Var Encoders::cell_scores(const Var& cell_reps) { return cell_head_(cell_reps); }

Var Encoders::fusion_gate(const Var& stop_rep, const Var& center_rep) {
  const Var parts[] = {stop_rep, center_rep};
  return nn::sigmoid(gate_head_(nn::concat_cols(parts)));
}

Var Encoders::semantic_logits(const Var& cell_reps) { return semantic_head_(cell_reps); }

}  // namespace hnav
