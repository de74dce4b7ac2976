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

#include "hnav/agent.hpp"
#include "hnav/metrics.hpp"

using namespace hnav;
using nn::Matrix;
using nn::Var;

namespace {

EncoderConfig tiny() {
  EncoderConfig c;
  c.dim = 16;
  c.heads = 2;
  c.text_layers = 1;
  c.pano_layers = 1;
  c.long_layers = 1;
  c.short_layers = 1;
  c.vocab_size = vocabulary().size();
  c.view_dim = 8;
  return c;
}

WorldParams tiny_world() {
  WorldParams p;
  p.view_dim = 8;
  p.views = 4;
  p.camera.grid_h = 4;
  p.camera.grid_w = 4;
  return p;
}

RolloutConfig tiny_rollout(int max_steps = 15) {
  RolloutConfig r;
  r.max_steps = max_steps;
  r.map.spec = MapSpec{7, 7, 1.0, -0.5, 2.5};
  return r;
}

FusedScores rigged(const StepInputs& in, const std::function<double(NodeId)>& score) {
  std::vector<double> s;
  for (NodeId a : in.actions) s.push_back(score(a));
  const int n = static_cast<int>(s.size());
  const Var g = nn::constant(Matrix(n, 1, s));
  return fuse_scores(in.actions, std::vector<std::uint8_t>(in.actions.size(), 0), g, g,
                     nn::constant(Matrix(1, 1, 1.0)));
}

}  // namespace

TEST_CASE("a scorer that prefers stop ends at the start") {
  const World w = generate_world(1, tiny_world());
  const Episode ep = generate_episode(w, 2, EpisodeKind::kGoal);
  Encoders enc(tiny(), 1);
  std::mt19937_64 rng(0);
  const auto res = rollout(w, ep, enc, tiny_rollout(), rng, [](const StepInputs& in) {
    return rigged(in, [](NodeId a) { return a == kStopNode ? 1.0 : 0.0; });
  });
  CHECK(res.trajectory.nodes == std::vector<NodeId>{ep.start});
  CHECK(res.decisions == 1);
  CHECK(res.stopped);
  REQUIRE(res.log.size() == 1);
  CHECK(res.log[0].chosen == kStopNode);
  CHECK(res.log[0].moves.empty());
  CHECK(res.trajectory.length == 0.0);
}

TEST_CASE("the step limit caps decisions") {
  const World w = generate_world(1, tiny_world());
  const Episode ep = generate_episode(w, 3, EpisodeKind::kGoal);
  Encoders enc(tiny(), 1);
  std::mt19937_64 rng(0);
  for (int limit : {1, 4, 15}) {
    const auto res = rollout(w, ep, enc, tiny_rollout(limit), rng, [](const StepInputs& in) {
      return rigged(in, [](NodeId a) { return a == kStopNode ? -1e9 : -static_cast<double>(a.value); });
    });
    CHECK(res.decisions == limit);
    CHECK_FALSE(res.stopped);
    CHECK(res.log.size() == static_cast<std::size_t>(limit));
  }
}

TEST_CASE("choosing a distant node walks every intermediate edge") {
  const World w = generate_world(4, tiny_world());
  Encoders enc(tiny(), 1);
  std::mt19937_64 rng(0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Episode ep = generate_episode(w, s, EpisodeKind::kGoal);
    // Prefer the action farthest from the current position in straight-line distance.
    const auto res = rollout(w, ep, enc, tiny_rollout(8), rng, [&](const StepInputs& in) {
      const Vec3 here = w.node(in.current).position;
      return rigged(in, [&](NodeId a) { return a == kStopNode ? -1.0 : (w.node(a).position - here).norm(); });
    });
    const auto& t = res.trajectory.nodes;
    double len = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double e = w.edge_length(t[i - 1], t[i]);
      CHECK(e > 0.0);
      len += e;
    }
    CHECK(res.trajectory.length == doctest::Approx(len));
    CHECK(res.trajectory.poses.size() == t.size());
    std::size_t moved = 1;
    bool multi = false;
    for (const auto& step : res.log) {
      if (!step.moves.empty()) CHECK(step.moves.back() == step.chosen);
      multi = multi || step.moves.size() > 1;
      moved += step.moves.size();
    }
    CHECK(moved == t.size());
    if (s == 0) MESSAGE("multi-hop seen: " << multi);
  }
}

TEST_CASE("four-node chain") {
  // Hand-built chain A-B-C-D in four rooms along +x, one viewpoint each plus a twin.
  WorldParams p = tiny_world();
  p.n_rooms = 4;
  p.nodes_per_room = 2;
  World w;
  w.params = p;
  for (int r = 0; r < 4; ++r) {
    Room room;
    room.id = r;
    room.gx = r;
    room.gy = 0;
    room.semantic_class = r;
    room.signature.assign(8, 0.1 * r);
    w.rooms.push_back(room);
    if (r > 0) w.doors.push_back({r - 1, r});
  }
  for (std::uint32_t i = 0; i < 8; ++i) {
    WorldNode n;
    n.id = NodeId{i};
    n.room = static_cast<int>(i / 2);
    n.position = Vec3(n.room * 5.0 + (i % 2 ? 3.5 : 1.5), 2.5, 0.0);
    w.nodes.push_back(n);
  }
  for (std::uint32_t i = 0; i + 1 < 8; ++i) w.edges.push_back({NodeId{i}, NodeId{i + 1}, 2.0});
  w.finalize();
  Episode ep;
  ep.start = NodeId{0};
  ep.target = NodeId{7};
  ep.expert_path = w.shortest_path(ep.start, ep.target);
  ep.instruction = {2, 3, 4};
  Encoders enc(tiny(), 1);
  std::mt19937_64 rng(0);
  // 0 -> 1 -> 2, then back to 0 through 1 in a single decision, then Stop.
  int step = 0;
  const auto res = rollout(w, ep, enc, tiny_rollout(), rng, [&](const StepInputs& in) {
    const int k = step++;
    const NodeId want = k == 0 ? NodeId{1} : k == 1 ? NodeId{2} : k == 2 ? NodeId{0} : kStopNode;
    return rigged(in, [&](NodeId a) { return a == want ? 1.0 : 0.0; });
  });
  CHECK(res.trajectory.nodes == std::vector<NodeId>{NodeId{0}, NodeId{1}, NodeId{2}, NodeId{1}, NodeId{0}});
  REQUIRE(res.log.size() == 4);
  CHECK(res.log[2].moves == std::vector<NodeId>{NodeId{1}, NodeId{0}});
  CHECK(res.trajectory.length == doctest::Approx(8.0));
  CHECK(res.stopped);

  // Goal label walks toward node 7 and stops within the radius.
  NavState st(w, enc, tiny_rollout().map);
  st.arrive(NodeId{0}, 0.0);
  CHECK(goal_pseudo_label(st.topo(), w, NodeId{7}) == NodeId{1});
  for (std::uint32_t i = 1; i <= 5; ++i) st.move_to(NodeId{i});
  CHECK(goal_pseudo_label(st.topo(), w, NodeId{7}) == NodeId{6});
  st.move_to(NodeId{6});
  CHECK(goal_pseudo_label(st.topo(), w, NodeId{7}) == kStopNode);
}

TEST_CASE("pseudo labels on expert prefixes") {
  const World w = generate_world(6, tiny_world());
  Encoders enc(tiny(), 1);
  const RolloutConfig rc = tiny_rollout();
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Episode ep = generate_episode(w, s, s % 2 ? EpisodeKind::kFidelity : EpisodeKind::kGoal);
    const auto goal_d = w.distances_from(ep.target);
    const Vec3 goal = w.node(ep.target).position;
    NavState st(w, enc, rc.map);
    st.arrive(ep.start, ep.start_heading);
    for (std::size_t k = 0; k < ep.expert_path.size(); ++k) {
      if (k > 0) st.move_to(ep.expert_path[k]);
      const auto acts = st.topo().global_action_space();
      // Goal label: brute force over the action space.
      NodeId ref = kStopNode;
      if ((w.node(st.current()).position - goal).norm() > 3.0) {
        double best = 1e300;
        for (NodeId a : acts)
          if (a != kStopNode && goal_d[a.value] < best) best = goal_d[(ref = a).value];
      }
      CHECK(goal_pseudo_label(st.topo(), w, ep.target) == ref);

      // Fidelity label: its extension matches the expert at least as well as the expert's next move.
      const NodeId f = fidelity_pseudo_label(st.topo(), w, st.trajectory(), ep.expert_path);
      auto score = [&](NodeId a) {
        std::vector<NodeId> ext = st.trajectory();
        if (a != kStopNode) {
          const auto leg = st.topo().shortest_path(st.current(), a);
          ext.insert(ext.end(), leg.begin() + 1, leg.end());
        }
        return ndtw(positions_of(w, ext), positions_of(w, ep.expert_path));
      };
      const NodeId expert_next = k + 1 < ep.expert_path.size() ? ep.expert_path[k + 1] : kStopNode;
      CHECK(score(f) >= score(expert_next) - 1e-12);
      if (k + 1 == ep.expert_path.size()) CHECK(f == kStopNode);
    }
  }
  CHECK_THROWS_AS(fidelity_pseudo_label(TopoMap(8), w, {}, {}), LabelError);
}

TEST_CASE("expert, random and greedy policies") {
  const World w = generate_world(8, tiny_world());
  Encoders enc(tiny(), 1);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Episode ep = generate_episode(w, s, EpisodeKind::kGoal);
    CHECK(evaluate(expert_trajectory(ep), ep, w).sr == 1.0);
    std::mt19937_64 r1(s), r2(s);
    const auto a = random_walk(w, ep, 15, r1);
    CHECK(a == random_walk(w, ep, 15, r2));
    CHECK(a.front() == ep.start);
    CHECK(a.size() <= 16);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(w.edge_length(a[i - 1], a[i]) > 0.0);
    const auto g1 = greedy_rollout(w, ep, enc, tiny_rollout());
    const auto g2 = greedy_rollout(w, ep, enc, tiny_rollout());
    CHECK(g1.trajectory.nodes == g2.trajectory.nodes);
    CHECK(g1.decisions <= 15);
  }
}

TEST_CASE("teacher forcing loss and finetuning steps") {
  const World w = generate_world(9, tiny_world());
  const Episode ep = generate_episode(w, 1, EpisodeKind::kGoal);
  Encoders enc(tiny(), 1);
  const Var tf = teacher_forcing_loss(w, ep, enc, tiny_rollout().map);
  CHECK(std::isfinite(tf.item()));
  CHECK(tf.item() > 0.0);
  const PretrainSample batch[] = {{&w, &ep}};
  FinetuneConfig fc;
  fc.rollout = tiny_rollout();
  Finetuner ft(enc, fc, OptimConfig{});
  std::mt19937_64 rng(2);
  const auto a = ft.step(batch, rng);
  const auto b = ft.step(batch, rng);
  const auto c = ft.step(batch, rng);
  CHECK(a.teacher);
  CHECK_FALSE(b.teacher);
  CHECK(c.teacher);
  CHECK(ft.steps() == 3);
  fc.student_forcing = false;
  Finetuner only_tf(enc, fc, OptimConfig{});
  CHECK(only_tf.step(batch, rng).teacher);
  CHECK(only_tf.step(batch, rng).teacher);
}
