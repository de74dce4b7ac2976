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

// Differentiable encoder stack at toy dimensions: instruction encoder,
// panorama encoder, cross-modal long-term (graph-aware) and short-term
// (cell-level) transformers, and the task heads that sit on top of them.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hnav/geometry.hpp"
#include "hnav/tensor.hpp"
#include "hnav/topo_map.hpp"

namespace hnav {

struct EncoderConfig {
  int dim = 64;
  int heads = 4;
  int text_layers = 2;
  int pano_layers = 2;
  int long_layers = 2;
  int short_layers = 2;
  int vocab_size = 64;
  int max_len = 40;
  int ffn_mult = 4;
  int view_dim = 32;    // raw synthetic view / grid feature size
  int num_classes = 8;  // semantic classes predicted by the imagination head
  int max_step = 50;    // step embedding table is clamped here
  double dropout = 0.0;
  double init_std = 0.02;

  void validate() const;
};

struct NodeEmbeddingInput {
  std::vector<double> feature;  // dim
  double rel_heading = 0.0;     // radians, egocentric
  double rel_distance = 0.0;    // meters
  int step = 0;
  NodeKind kind = NodeKind::kUnexplored;
};

namespace nn {

struct Linear {
  Var weight;  // in x out
  Var bias;    // 1 x out
  Var operator()(const Var& x) const;
};

struct LayerNormParams {
  Var gamma;
  Var beta;
  Var operator()(const Var& x) const;
};

struct AttentionParams {
  Linear q, k, v, o;
};

struct FeedForward {
  Linear up, down;
};

struct SelfBlock {
  AttentionParams attn;
  LayerNormParams ln_attn;
  FeedForward ffn;
  LayerNormParams ln_ffn;
};

/// One cross-modal layer: cross-attention in both directions, then
/// self-attention and a feed-forward per modality.
struct CrossLayer {
  AttentionParams vis_cross, text_cross, vis_self, text_self;
  LayerNormParams ln_vis_cross, ln_text_cross, ln_vis_self, ln_text_self;
  FeedForward vis_ffn, text_ffn;
  LayerNormParams ln_vis_ffn, ln_text_ffn;
  Var gasa_w;  // 1 x 1, only used by the long-term branch
  Var gasa_b;
};

struct ScoreHead {
  Linear hidden, out;
  Var operator()(const Var& x) const;
};

/// Multi-head scaled dot-product attention:
/// softmax((xq Wq)(xkv Wk)^T / sqrt(d_head) + bias)(xkv Wv), heads concatenated
/// and projected by Wo. `bias` (len_q x len_kv) is shared by all heads.
Var attention(const AttentionParams& p, const Var& xq, const Var& xkv, const Var* bias,
              int heads);

/// Learned scalar affine of pairwise distances; Stop rows/cols get 0.
Var gasa_bias(const Matrix& affinity, std::span<const std::uint8_t> stop_mask, const Var& w,
              const Var& b);

Var dropout(const Var& x, double p, std::mt19937_64& rng);

}  // namespace nn

struct LongTermOutput {
  nn::Var nodes;  // N x D
  nn::Var text;   // L x D
};

struct ShortTermOutput {
  nn::Var cells;  // U*V x D
  nn::Var text;   // L x D
  int center_index = 0;
};

class Encoders {
 public:
  Encoders(const EncoderConfig& cfg, std::uint64_t seed);

  const EncoderConfig& config() const { return cfg_; }
  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }

  void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }

  /// L x D contextual word representations.
  nn::Var text_encode(std::span<const int> tokens);

  /// view_features K x view_dim, view_angles K x 2 (heading, elevation).
  nn::Var pano_encode(const nn::Matrix& view_features, const nn::Matrix& view_angles);
  // Same network on differentiable inputs: features K x view_dim and the
  // angle encoding K x 4 [sin h, cos h, sin e, cos e].
  nn::Var pano_encode_vars(const nn::Var& view_features, const nn::Var& angle_encoding);

  /// N x D node embeddings (feature + location + step), before the layers.
  nn::Var node_embeddings(std::span<const NodeEmbeddingInput> nodes);
  /// U*V x D cell embeddings (feature or mask + polar + navigability).
  nn::Var cell_embeddings(const MetricMap& map);

  /// `affinity` is N x N pairwise distances in node order; node 0 is Stop.
  LongTermOutput long_term_encode(std::span<const NodeEmbeddingInput> nodes,
                                  const nn::Var& text, const nn::Matrix& affinity);

  ShortTermOutput short_term_encode(const MetricMap& map, const nn::Var& text);

  /// Per-layer hidden states of the instruction encoder after each block
  /// (for normalization checks).
  std::vector<nn::Matrix> text_layer_outputs(std::span<const int> tokens);

  // Heads.
  nn::Var word_logits(const nn::Var& text_reps);   // L x vocab
  nn::Var node_scores(const nn::Var& node_reps);   // N x 1
  nn::Var cell_scores(const nn::Var& cell_reps);   // M x 1
  nn::Var fusion_gate(const nn::Var& stop_rep, const nn::Var& center_rep);  // 1 x 1
  nn::Var semantic_logits(const nn::Var& cell_reps);  // M x C

  // Handles exposed for tests.
  nn::CrossLayer& long_layer(int i) { return long_layers_.at(static_cast<std::size_t>(i)); }

 private:
  nn::Linear make_linear(const std::string& name, int in, int out);
  nn::LayerNormParams make_ln(const std::string& name, int n);
  nn::AttentionParams make_attn(const std::string& name);
  nn::FeedForward make_ffn(const std::string& name);
  nn::SelfBlock make_self_block(const std::string& name);
  nn::CrossLayer make_cross_layer(const std::string& name);
  nn::Var embed_table(const std::string& name, int rows, int cols);

  nn::Var run_self_block(const nn::SelfBlock& b, const nn::Var& x);
  nn::Var run_ffn(const nn::FeedForward& f, const nn::Var& x);
  std::pair<nn::Var, nn::Var> run_cross_layer(const nn::CrossLayer& layer, const nn::Var& vis,
                                              const nn::Var& text, const nn::Var* vis_bias);
  nn::Var drop(const nn::Var& x);

  EncoderConfig cfg_;
  std::mt19937_64 rng_;
  std::mt19937_64 dropout_rng_;
  bool training_ = false;
  nn::ParameterStore store_;

  nn::Var tok_emb_, pos_emb_, type_emb_;
  nn::LayerNormParams ln_text_emb_;
  std::vector<nn::SelfBlock> text_blocks_;

  nn::Linear view_proj_, angle_proj_;
  nn::LayerNormParams ln_pano_emb_;
  std::vector<nn::SelfBlock> pano_blocks_;

  nn::Linear loc_proj_;
  nn::Var step_emb_;
  nn::LayerNormParams ln_node_emb_;
  std::vector<nn::CrossLayer> long_layers_;

  nn::Linear cell_proj_, polar_proj_, nav_proj_;
  nn::Var cell_mask_emb_;
  nn::LayerNormParams ln_cell_emb_;
  std::vector<nn::CrossLayer> short_layers_;

  nn::Linear word_hidden_;
  nn::LayerNormParams word_ln_;
  nn::Linear word_out_;
  nn::ScoreHead node_head_, cell_head_, gate_head_, semantic_head_;
};

}  // namespace hnav
