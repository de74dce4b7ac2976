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

// Proxy tasks: masked word recovery over both map branches (HMLM), hybrid
// single-action prediction with gated score fusion (HSAP), masked cell
// semantic imagination (MSI), and the task-mixing training step.

#include <array>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hnav/encoders.hpp"
#include "hnav/env.hpp"
#include "hnav/nav_state.hpp"
#include "hnav/optim.hpp"

namespace hnav {

inline constexpr double kDefaultMaskRate = 0.15;

struct MaskPlan {
  std::vector<int> indices;           // token positions or flat cell indices
  std::vector<int> token_originals;   // HMLM
  std::vector<SemanticBits> cell_labels;  // MSI
  bool empty() const { return indices.empty(); }
};

std::pair<std::vector<int>, MaskPlan> mask_tokens(std::span<const int> tokens, double p,
                                                  std::mt19937_64& rng);

/// Only observed cells are maskable. Masked cells get zero features and the
/// `masked` flag; the plan keeps their semantic bitsets.
std::pair<MetricMap, MaskPlan> mask_cells(const MetricMap& map, double p, std::mt19937_64& rng);

/// Mean NLL of the original tokens at masked positions, predicted from the
/// sum of the two branches' word representations. Empty plan gives 0.
nn::Var hmlm_loss(Encoders& enc, const nn::Var& text_global, const nn::Var& text_local,
                  const MaskPlan& plan);

struct FusedScores {
  std::vector<NodeId> actions;        // global action space, Stop first
  std::vector<std::uint8_t> in_local; // action has a registered cell
  nn::Var global;  // n x 1
  nn::Var local;   // n x 1, meaningful only where in_local
  nn::Var fused;   // n x 1
  nn::Var delta;   // 1 x 1

  std::size_t size() const { return actions.size(); }
  double s_global(std::size_t i) const { return global.value().data[i]; }
  std::optional<double> s_local(std::size_t i) const;
  double s(std::size_t i) const { return fused.value().data[i]; }
  double delta_value() const { return delta.value().data[0]; }
  std::size_t index_of(NodeId id) const;  // throws LabelError
  std::size_t argmax() const;  // first maximum
};

/// s = delta * s_G + (1 - delta) * s_M where a local score exists, else s_G.
FusedScores fuse_scores(std::vector<NodeId> actions, std::vector<std::uint8_t> in_local,
                        const nn::Var& global, const nn::Var& local, const nn::Var& delta);

/// Node scores for every global action, cell scores for actions registered
/// in the local action space, and the state gate from the stop node and the
/// central cell. `node_reps` rows follow `inputs.node_order`.
FusedScores hsap_scores(Encoders& enc, const nn::Var& node_reps, const nn::Var& cell_reps,
                        int center_index, const StepInputs& inputs);

nn::Var hsap_loss(const FusedScores& scores, NodeId teacher);

/// Mean BCE over C classes of the masked cells. Empty plan gives 0.
nn::Var msi_loss(Encoders& enc, const nn::Var& cell_reps, const MaskPlan& plan,
                 int num_classes);

enum class Task { kHmlm = 0, kHsap = 1, kMsi = 2 };
const char* task_name(Task t);

class TaskSampler {
 public:
  explicit TaskSampler(std::array<double, 3> weights = {5.0, 5.0, 1.0});
  Task sample(std::mt19937_64& rng);

 private:
  std::discrete_distribution<int> dist_;
};

/// Uniform prefix length in {1..len}.
int sample_chunk_length(int len, std::mt19937_64& rng);

struct PretrainSample {
  const World* world = nullptr;
  const Episode* episode = nullptr;
};

struct PretrainConfig {
  double token_mask_rate = kDefaultMaskRate;
  double cell_mask_rate = kDefaultMaskRate;
  std::array<double, 3> task_weights{5.0, 5.0, 1.0};
  MapConfig map;
};

struct PretrainStepResult {
  Task task = Task::kHmlm;
  double loss = 0.0;
  double lr = 0.0;
  int contributing = 0;  // samples that produced a loss term
};

class Pretrainer {
 public:
  Pretrainer(Encoders& enc, const PretrainConfig& cfg, const OptimConfig& optim);

  /// One task for the minibatch, one prefix per sample, one optimizer step.
  PretrainStepResult step(std::span<const PretrainSample> batch, std::mt19937_64& rng);

  /// Loss of one sample for a fixed task and prefix; builds the graph when
  /// gradients are enabled. Returns nullopt when the task has nothing to
  /// supervise (empty mask plan).
  std::optional<nn::Var> sample_loss(const PretrainSample& sample, Task task, int prefix,
                                     std::mt19937_64& rng);

  AdamW& optimizer() { return opt_; }

 private:
  Encoders& enc_;
  PretrainConfig cfg_;
  AdamW opt_;
  TaskSampler sampler_;
};

/// Replays the first `prefix` nodes of `path` into a fresh agent state.
NavState replay_prefix(const World& world, Encoders& enc, const MapConfig& cfg,
                       const std::vector<NodeId>& path, int prefix, double start_heading);

}  // namespace hnav
