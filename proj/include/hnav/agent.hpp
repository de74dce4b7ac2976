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

// Rollouts (greedy or sampled), pseudo labels for student forcing, and the
// teacher/student fine-tuning step.

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hnav/encoders.hpp"
#include "hnav/env.hpp"
#include "hnav/nav_state.hpp"
#include "hnav/optim.hpp"
#include "hnav/pretrain.hpp"

namespace hnav {

enum class RolloutMode { kGreedy, kSample };

struct RolloutConfig {
  int max_steps = 15;
  RolloutMode mode = RolloutMode::kGreedy;
  MapConfig map;
  int top_k = 3;  // scores kept per logged step
  void validate() const;
};

struct StepLog {
  int step = 0;
  NodeId chosen;
  double delta = 0.0;
  std::vector<std::pair<NodeId, double>> top;  // highest fused scores first
  std::vector<NodeId> moves;                   // environment nodes entered
  std::optional<NodeId> label;
};

struct Trajectory {
  std::vector<NodeId> nodes;  // environment nodes, start first
  std::vector<Pose> poses;    // agent pose on arrival at each node
  double length = 0.0;
};

struct RolloutResult {
  Trajectory trajectory;
  std::vector<StepLog> log;
  int decisions = 0;
  bool stopped = false;  // chose Stop before the step limit
  nn::Var loss;          // summed per-step losses when supervised
  int supervised_steps = 0;
};

/// Produces fused scores for the current decision step.
using Scorer = std::function<FusedScores(const StepInputs&)>;
/// Returns the supervision target for the current decision step.
using Labeler = std::function<NodeId(const NavState&)>;

/// Scores from the encoders, with the instruction encoded once by the caller.
Scorer model_scorer(Encoders& enc, const nn::Var& text);

RolloutResult rollout(const World& world, const Episode& episode, Encoders& enc,
                      const RolloutConfig& cfg, std::mt19937_64& rng,
                      const Scorer& scorer, const Labeler& labeler = {});

/// Greedy, gradient-free rollout with the model's own scores.
RolloutResult greedy_rollout(const World& world, const Episode& episode, Encoders& enc,
                             const RolloutConfig& cfg);

/// Stop when the current node is within `success_radius` of the target,
/// else the actionable node with the smallest graph distance to the target.
NodeId goal_pseudo_label(const TopoMap& topo, const World& world, NodeId target,
                         double success_radius = 3.0);

/// Actionable node whose shortest-path extension of `partial` best matches
/// the expert path under NDTW; Stop is scored without extension.
NodeId fidelity_pseudo_label(const TopoMap& topo, const World& world,
                             std::span<const NodeId> partial, std::span<const NodeId> expert);

enum class PseudoLabel { kGoal, kFidelity };

struct FinetuneConfig {
  double lambda = 0.2;
  PseudoLabel label = PseudoLabel::kGoal;
  bool student_forcing = true;  // false: every minibatch is teacher forced
  RolloutConfig rollout;
};

/// Sum over the expert path of the per-step action losses (the expert's next
/// node, then Stop at the end).
nn::Var teacher_forcing_loss(const World& world, const Episode& episode, Encoders& enc,
                             const MapConfig& map);

class Finetuner {
 public:
  Finetuner(Encoders& enc, const FinetuneConfig& cfg, const OptimConfig& optim);

  struct Result {
    bool teacher = true;
    double loss = 0.0;
    double lr = 0.0;
  };

  /// Teacher- and student-forced minibatches alternate strictly; the
  /// teacher loss is scaled by lambda.
  Result step(std::span<const PretrainSample> batch, std::mt19937_64& rng);

  AdamW& optimizer() { return opt_; }
  int steps() const { return steps_; }

 private:
  Encoders& enc_;
  FinetuneConfig cfg_;
  AdamW opt_;
  int steps_ = 0;
};

/// Follows the expert path verbatim.
std::vector<NodeId> expert_trajectory(const Episode& episode);

/// Uniform choice among Stop and the current node's neighbors at each step.
std::vector<NodeId> random_walk(const World& world, const Episode& episode, int max_steps,
                                std::mt19937_64& rng);

}  // namespace hnav
