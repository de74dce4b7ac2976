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

#include "hnav/pretrain.hpp"

#include <algorithm>
#include <numeric>

#include "hnav/env.hpp"

namespace hnav {

using nn::Matrix;
using nn::Var;

std::pair<std::vector<int>, MaskPlan> mask_tokens(std::span<const int> tokens, double p,
                                                  std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw DimensionError("mask probability must lie in [0, 1]");
  std::bernoulli_distribution coin(p);
  std::vector<int> out(tokens.begin(), tokens.end());
  MaskPlan plan;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (coin(rng)) {
      plan.indices.push_back(static_cast<int>(i));
      plan.token_originals.push_back(out[i]);
      out[i] = Vocabulary::kMask;
    }
  }
  return {std::move(out), std::move(plan)};
}

std::pair<MetricMap, MaskPlan> mask_cells(const MetricMap& map, double p, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw DimensionError("mask probability must lie in [0, 1]");
  std::bernoulli_distribution coin(p);
  MetricMap out = map;
  MaskPlan plan;
  for (std::size_t i = 0; i < map.observed.size(); ++i) {
    if (!map.observed[i] || !coin(rng)) continue;
    out.masked[i] = 1;
    std::fill_n(out.features.begin() + static_cast<std::ptrdiff_t>(i * map.feature_dim),
                map.feature_dim, 0.0);
    plan.indices.push_back(static_cast<int>(i));
    plan.cell_labels.push_back(map.semantics[i]);
  }
  return {std::move(out), std::move(plan)};
}

Var hmlm_loss(Encoders& enc, const Var& text_global, const Var& text_local,
              const MaskPlan& plan) {
  if (plan.empty()) return nn::constant(Matrix(1, 1, 0.0));
  const Var rows = nn::gather_rows(nn::add(text_global, text_local), plan.indices);
  return nn::cross_entropy(enc.word_logits(rows), plan.token_originals);
}

std::optional<double> FusedScores::s_local(std::size_t i) const {
  if (!in_local[i]) return std::nullopt;
  return local.value().data[i];
}

std::size_t FusedScores::index_of(NodeId id) const {
  auto it = std::find(actions.begin(), actions.end(), id);
  if (it == actions.end()) throw LabelError("node " + to_string(id) + " is not actionable");
  return static_cast<std::size_t>(it - actions.begin());
}

std::size_t FusedScores::argmax() const {
  const auto& d = fused.value().data;
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

FusedScores fuse_scores(std::vector<NodeId> actions, std::vector<std::uint8_t> in_local,
                        const Var& global, const Var& local, const Var& delta) {
  const int n = static_cast<int>(actions.size());
  if (global.rows() != n || global.cols() != 1 || local.rows() != n || local.cols() != 1 ||
      static_cast<int>(in_local.size()) != n) {
    throw DimensionError("fused score inputs must be n x 1");
  }
  Matrix mask(n, 1);
  for (int i = 0; i < n; ++i) mask(i, 0) = in_local[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  // delta*g + (1-delta)*l == g + (1-delta)*(l-g) on local entries.
  const Var diff = nn::mul(nn::sub(local, global), nn::constant(std::move(mask)));
  const Var fused = nn::add(global, nn::mul_scalar(diff, nn::one_minus(delta)));
  return {std::move(actions), std::move(in_local), global, local, fused, delta};
}

FusedScores hsap_scores(Encoders& enc, const Var& node_reps, const Var& cell_reps,
                        int center_index, const StepInputs& inputs) {
  const int n = static_cast<int>(inputs.actions.size());
  std::vector<int> action_rows(static_cast<std::size_t>(n));
  std::iota(action_rows.begin(), action_rows.end(), 0);
  const Var global = enc.node_scores(nn::gather_rows(node_reps, action_rows));

  // Cell -> node alignment through the map's registry.
  std::vector<int> cell_rows(static_cast<std::size_t>(n), center_index);
  std::vector<std::uint8_t> in_local(static_cast<std::size_t>(n), 0);
  const MapSpec& spec = inputs.map.spec;
  for (int u = 0; u < spec.u; ++u) {
    for (int v = 0; v < spec.v; ++v) {
      for (NodeId id : cell_to_node(inputs.map, u, v)) {
        auto it = std::find(inputs.actions.begin(), inputs.actions.end(), id);
        if (it == inputs.actions.end()) continue;  // the current node
        const auto i = static_cast<std::size_t>(it - inputs.actions.begin());
        in_local[i] = 1;
        cell_rows[i] = static_cast<int>(spec.index(u, v));
      }
    }
  }
  const Var local = enc.cell_scores(nn::gather_rows(cell_reps, cell_rows));
  const int stop_row[] = {0};
  const int center_row[] = {center_index};
  const Var delta =
      enc.fusion_gate(nn::gather_rows(node_reps, stop_row), nn::gather_rows(cell_reps, center_row));
  return fuse_scores(inputs.actions, std::move(in_local), global, local, delta);
}

Var hsap_loss(const FusedScores& scores, NodeId teacher) {
  const int target[] = {static_cast<int>(scores.index_of(teacher))};
  return nn::cross_entropy(nn::transpose(scores.fused), target);
}

Var msi_loss(Encoders& enc, const Var& cell_reps, const MaskPlan& plan, int num_classes) {
  if (plan.empty()) return nn::constant(Matrix(1, 1, 0.0));
  const Var logits = enc.semantic_logits(nn::gather_rows(cell_reps, plan.indices));
  if (logits.cols() != num_classes) throw DimensionError("semantic head width mismatch");
  Matrix targets(static_cast<int>(plan.indices.size()), num_classes);
  for (int r = 0; r < targets.rows; ++r) {
    for (int c = 0; c < num_classes; ++c) {
      targets(r, c) = (plan.cell_labels[static_cast<std::size_t>(r)] >> c) & 1U ? 1.0 : 0.0;
    }
  }
  return nn::bce_with_logits(logits, targets);
}

const char* task_name(Task t) {
  switch (t) {
    case Task::kHmlm:
      return "hmlm";
    case Task::kHsap:
      return "hsap";
    case Task::kMsi:
      return "msi";
  }
  return "?";
}

TaskSampler::TaskSampler(std::array<double, 3> weights)
    : dist_(weights.begin(), weights.end()) {}

Task TaskSampler::sample(std::mt19937_64& rng) { return static_cast<Task>(dist_(rng)); }

int sample_chunk_length(int len, std::mt19937_64& rng) {
  if (len < 1) throw DimensionError("trajectory must have at least one node");
  return std::uniform_int_distribution<int>(1, len)(rng);
}

NavState replay_prefix(const World& world, Encoders& enc, const MapConfig& cfg,
                       const std::vector<NodeId>& path, int prefix, double start_heading) {
  NavState state(world, enc, cfg);
  state.arrive(path.at(0), start_heading);
  for (int i = 1; i < prefix; ++i) state.move_to(path.at(static_cast<std::size_t>(i)));
  return state;
}

Pretrainer::Pretrainer(Encoders& enc, const PretrainConfig& cfg, const OptimConfig& optim)
    : enc_(enc), cfg_(cfg), opt_(enc.params(), optim), sampler_(cfg.task_weights) {}

std::optional<Var> Pretrainer::sample_loss(const PretrainSample& sample, Task task, int prefix,
                                           std::mt19937_64& rng) {
  const Episode& ep = *sample.episode;
  const World& world = *sample.world;
  NavState state = replay_prefix(world, enc_, cfg_.map, ep.expert_path, prefix, ep.start_heading);
  const StepInputs in = state.inputs();
  switch (task) {
    case Task::kHmlm: {
      auto [tokens, plan] = mask_tokens(ep.instruction, cfg_.token_mask_rate, rng);
      if (plan.empty()) return std::nullopt;
      const Var text = enc_.text_encode(tokens);
      const auto lt = enc_.long_term_encode(in.nodes, text, in.affinity);
      const auto st = enc_.short_term_encode(in.map, text);
      return hmlm_loss(enc_, lt.text, st.text, plan);
    }
    case Task::kHsap: {
      const Var text = enc_.text_encode(ep.instruction);
      const auto lt = enc_.long_term_encode(in.nodes, text, in.affinity);
      const auto st = enc_.short_term_encode(in.map, text);
      const FusedScores scores = hsap_scores(enc_, lt.nodes, st.cells, st.center_index, in);
      const std::size_t len = ep.expert_path.size();
      const NodeId teacher =
          static_cast<std::size_t>(prefix) < len ? ep.expert_path[static_cast<std::size_t>(prefix)]
                                                 : kStopNode;
      return hsap_loss(scores, teacher);
    }
    case Task::kMsi: {
      auto [masked, plan] = mask_cells(in.map, cfg_.cell_mask_rate, rng);
      if (plan.empty()) return std::nullopt;
      const Var text = enc_.text_encode(ep.instruction);
      const auto st = enc_.short_term_encode(masked, text);
      return msi_loss(enc_, st.cells, plan, enc_.config().num_classes);
    }
  }
  return std::nullopt;
}

PretrainStepResult Pretrainer::step(std::span<const PretrainSample> batch, std::mt19937_64& rng) {
  PretrainStepResult res;
  res.task = sampler_.sample(rng);
  std::vector<Var> losses;
  for (const auto& s : batch) {
    const int prefix = sample_chunk_length(static_cast<int>(s.episode->expert_path.size()), rng);
    if (auto l = sample_loss(s, res.task, prefix, rng)) losses.push_back(*l);
  }
  res.contributing = static_cast<int>(losses.size());
  if (losses.empty()) return res;
  Var total = nn::sum_all(nn::concat_rows(losses));
  total = nn::scale(total, 1.0 / static_cast<double>(losses.size()));
  res.loss = total.item();
  nn::backward(total);
  res.lr = opt_.step();
  return res;
}

}  // namespace hnav
