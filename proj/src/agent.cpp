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

#include "hnav/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hnav/metrics.hpp"

namespace hnav {

using nn::Matrix;
using nn::Var;

void RolloutConfig::validate() const {
  if (max_steps < 1) throw DimensionError("max_steps must be at least 1");
  map.spec.validate();
}

Scorer model_scorer(Encoders& enc, const Var& text) {
  return [&enc, text](const StepInputs& in) {
    const auto lt = enc.long_term_encode(in.nodes, text, in.affinity);
    const auto st = enc.short_term_encode(in.map, text);
    return hsap_scores(enc, lt.nodes, st.cells, st.center_index, in);
  };
}

namespace {

std::size_t sample_index(const FusedScores& s, std::mt19937_64& rng) {
  const auto& v = s.fused.value().data;
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::exp(v[i] - mx);
  return static_cast<std::size_t>(std::discrete_distribution<int>(w.begin(), w.end())(rng));
}

std::vector<std::pair<NodeId, double>> top_scores(const FusedScores& s, int k) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.s(a) > s.s(b); });
  std::vector<std::pair<NodeId, double>> out;
  for (std::size_t i = 0; i < idx.size() && static_cast<int>(i) < k; ++i) {
    out.emplace_back(s.actions[idx[i]], s.s(idx[i]));
  }
  return out;
}

void record_arrival(Trajectory& t, const World& world, const NavState& state) {
  if (!t.nodes.empty()) t.length += world.edge_length(t.nodes.back(), state.current());
  t.nodes.push_back(state.current());
  t.poses.push_back(state.agent_pose());
}

}  // namespace

RolloutResult rollout(const World& world, const Episode& episode, Encoders& enc,
                      const RolloutConfig& cfg, std::mt19937_64& rng, const Scorer& scorer,
                      const Labeler& labeler) {
  cfg.validate();
  RolloutResult res;
  NavState state(world, enc, cfg.map);
  state.arrive(episode.start, episode.start_heading);
  record_arrival(res.trajectory, world, state);
  std::vector<Var> losses;

  while (res.decisions < cfg.max_steps) {
    const StepInputs in = state.inputs();
    const FusedScores scores = scorer(in);
    StepLog entry;
    entry.step = res.decisions;
    entry.delta = scores.delta_value();
    entry.top = top_scores(scores, cfg.top_k);
    if (labeler) {
      const NodeId label = labeler(state);
      entry.label = label;
      losses.push_back(hsap_loss(scores, label));
    }
    const std::size_t pick =
        cfg.mode == RolloutMode::kGreedy ? scores.argmax() : sample_index(scores, rng);
    const NodeId chosen = scores.actions[pick];
    entry.chosen = chosen;
    ++res.decisions;
    if (chosen == kStopNode) {
      res.stopped = true;
      res.log.push_back(std::move(entry));
      break;
    }
    const auto path = state.topo().shortest_path(state.current(), chosen);
    for (std::size_t i = 1; i < path.size(); ++i) {
      state.move_to(path[i]);
      record_arrival(res.trajectory, world, state);
      entry.moves.push_back(path[i]);
    }
    res.log.push_back(std::move(entry));
  }
  res.supervised_steps = static_cast<int>(losses.size());
  if (!losses.empty()) res.loss = nn::sum_all(nn::concat_rows(losses));
  return res;
}

RolloutResult greedy_rollout(const World& world, const Episode& episode, Encoders& enc,
                             const RolloutConfig& cfg) {
  nn::NoGradGuard guard;
  const Var text = enc.text_encode(episode.instruction);
  std::mt19937_64 unused(0);
  RolloutConfig greedy = cfg;
  greedy.mode = RolloutMode::kGreedy;
  return rollout(world, episode, enc, greedy, unused, model_scorer(enc, text));
}

NodeId goal_pseudo_label(const TopoMap& topo, const World& world, NodeId target,
                         double success_radius) {
  const Vec3 goal = world.node(target).position;
  if ((world.node(topo.current()).position - goal).norm() <= success_radius) return kStopNode;
  const auto dist = world.distances_from(target);
  const auto actions = topo.global_action_space();
  NodeId best = kStopNode;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId a : actions) {
    if (a == kStopNode) continue;
    if (dist[a.value] < best_d) {
      best_d = dist[a.value];
      best = a;
    }
  }
  return best;
}

NodeId fidelity_pseudo_label(const TopoMap& topo, const World& world,
                             std::span<const NodeId> partial, std::span<const NodeId> expert) {
  if (expert.empty()) throw LabelError("expert path is empty");
  const auto ref = positions_of(world, expert);
  std::vector<NodeId> path(partial.begin(), partial.end());
  NodeId best = kStopNode;
  double best_score = -1.0;
  for (NodeId a : topo.global_action_space()) {
    std::vector<NodeId> ext = path;
    if (a != kStopNode) {
      const auto leg = topo.shortest_path(topo.current(), a);
      ext.insert(ext.end(), leg.begin() + 1, leg.end());
    }
    const double score = ndtw(positions_of(world, ext), ref);
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

Var teacher_forcing_loss(const World& world, const Episode& episode, Encoders& enc,
                         const MapConfig& map) {
  const Var text = enc.text_encode(episode.instruction);
  const Scorer scorer = model_scorer(enc, text);
  NavState state(world, enc, map);
  state.arrive(episode.start, episode.start_heading);
  std::vector<Var> losses;
  const auto& path = episode.expert_path;
  for (std::size_t t = 0; t < path.size(); ++t) {
    const NodeId teacher = t + 1 < path.size() ? path[t + 1] : kStopNode;
    losses.push_back(hsap_loss(scorer(state.inputs()), teacher));
    if (teacher != kStopNode) state.move_to(teacher);
  }
  return nn::sum_all(nn::concat_rows(losses));
}

Finetuner::Finetuner(Encoders& enc, const FinetuneConfig& cfg, const OptimConfig& optim)
    : enc_(enc), cfg_(cfg), opt_(enc.params(), optim) {}

Finetuner::Result Finetuner::step(std::span<const PretrainSample> batch, std::mt19937_64& rng) {
  Result r;
  r.teacher = !cfg_.student_forcing || steps_ % 2 == 0;
  ++steps_;
  if (batch.empty()) return r;
  std::vector<Var> losses;
  for (const auto& s : batch) {
    const World& world = *s.world;
    const Episode& ep = *s.episode;
    if (r.teacher) {
      losses.push_back(teacher_forcing_loss(world, ep, enc_, cfg_.rollout.map));
      continue;
    }
    const Var text = enc_.text_encode(ep.instruction);
    RolloutConfig rc = cfg_.rollout;
    rc.mode = RolloutMode::kSample;
    Labeler labeler;
    if (cfg_.label == PseudoLabel::kGoal) {
      labeler = [&](const NavState& st) { return goal_pseudo_label(st.topo(), world, ep.target); };
    } else {
      labeler = [&](const NavState& st) {
        return fidelity_pseudo_label(st.topo(), world, st.trajectory(), ep.expert_path);
      };
    }
    RolloutResult rr = rollout(world, ep, enc_, rc, rng, model_scorer(enc_, text), labeler);
    if (rr.supervised_steps > 0) losses.push_back(rr.loss);
  }
  if (losses.empty()) return r;
  Var total = nn::scale(nn::sum_all(nn::concat_rows(losses)), 1.0 / static_cast<double>(batch.size()));
  if (r.teacher) total = nn::scale(total, cfg_.lambda);
  r.loss = total.item();
  if (r.teacher && cfg_.lambda == 0.0) return r;
  nn::backward(total);
  r.lr = opt_.step();
  return r;
}

std::vector<NodeId> expert_trajectory(const Episode& episode) { return episode.expert_path; }

std::vector<NodeId> random_walk(const World& world, const Episode& episode, int max_steps,
                                std::mt19937_64& rng) {
  std::vector<NodeId> path{episode.start};
  for (int s = 0; s < max_steps; ++s) {
    const auto nbs = world.neighbors(path.back());
    const auto pick = std::uniform_int_distribution<std::size_t>(0, nbs.size())(rng);
    if (pick == nbs.size()) break;  // stop
    path.push_back(nbs[pick]);
  }
  return path;
}

}  // namespace hnav
