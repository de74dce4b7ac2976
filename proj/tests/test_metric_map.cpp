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

#include <numbers>
#include <random>

#include "hnav/metric_map.hpp"
#include "oracles.hpp"

using namespace hnav;

TEST_CASE("polar embedding constants and invariants") {
  MapSpec spec;
  const auto c = polar_embedding(10, 10, spec);
  CHECK(c == std::array<double, 3>{1.0, 0.0, 0.0});
  const auto ahead = polar_embedding(15, 10, spec);
  CHECK(ahead[0] == doctest::Approx(1.0));
  CHECK(std::abs(ahead[1]) < 1e-15);
  CHECK(ahead[2] == doctest::Approx(0.33672).epsilon(1e-5));
  const auto left = polar_embedding(10, 13, spec);
  CHECK(std::abs(left[0]) < 1e-15);
  CHECK(left[1] == doctest::Approx(1.0));
  CHECK(left[2] > 0.0);
  for (MapSpec s : {MapSpec{}, MapSpec{11, 11, 1.0, -0.5, 2.5}, MapSpec{7, 13, 0.25, -0.5, 2.5}}) {
    for (int u = 0; u < s.u; ++u) {
      for (int v = 0; v < s.v; ++v) {
        const auto p = polar_embedding(u, v, s);
        const auto o = oracle::polar(u, v, s.u, s.v, s.cell_size);
        CHECK(std::abs(p[0] * p[0] + p[1] * p[1] - 1.0) < 1e-12);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(p[static_cast<std::size_t>(k)] - o[static_cast<std::size_t>(k)]) < 1e-12);
        CHECK(p[2] <= 1.0);
      }
    }
    // dis is monotone in the Chebyshev ring along each axis direction.
    for (int r = 1; r <= s.center_u(); ++r) {
      CHECK(polar_embedding(s.center_u() + r, s.center_v(), s)[2] >
            polar_embedding(s.center_u() + r - 1, s.center_v(), s)[2]);
    }
  }
  CHECK_THROWS_AS(polar_embedding(21, 0, spec), DimensionError);
}

TEST_CASE("node_to_cell cases and back-projection bound") {
  MapSpec spec;
  const Pose agent = Pose::from_yaw(0.4, Vec3(3, -2, 0));
  auto c = node_to_cell(agent, agent.translation(), spec);
  CHECK(c.u == 10);
  CHECK(c.v == 10);
  CHECK_FALSE(c.clamped);
  c = node_to_cell(agent, agent.apply(Vec3(1.0, 0, 0)), spec);
  CHECK(c.u == 12);
  CHECK(c.v == 10);
  c = node_to_cell(agent, agent.apply(Vec3(50.0, 0, 0)), spec);
  CHECK(c.u == 20);
  CHECK(c.clamped);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 ego(d(rng), d(rng), 0.0);
    const auto cell = node_to_cell(agent, agent.apply(ego), spec);
    if (cell.clamped) continue;
    const auto center = spec.cell_center(cell.u, cell.v);
    CHECK(std::hypot(center.x() - ego.x(), center.y() - ego.y()) <= spec.cell_size * std::sqrt(2.0) / 2 + 1e-12);
  }
}

TEST_CASE("local action space registers current and neighbors") {
  MapSpec spec;
  TopoMap topo(1);
  const std::vector<double> pano{0.0};
  topo.update(0, NodeId{0}, Pose::identity(), pano,
              std::vector<Candidate>{{NodeId{1}, Vec3(1, 0, 0), 0}, {NodeId{2}, Vec3(-1, 0, 0), 0}},
              PointCloud(1));
  MetricMap map(spec, 1);
  const auto la = local_action_space(topo, Pose::identity(), spec, &map);
  REQUIRE(la.size() == 3);
  CHECK(la[0].node == NodeId{0});
  CHECK((la[0].u == 10 && la[0].v == 10));
  CHECK((la[1].u == 12 && la[1].v == 10));
  CHECK((la[2].u == 8 && la[2].v == 10));
  CHECK(cell_to_node(map, 10, 10) == std::vector<NodeId>{NodeId{0}});
  CHECK(cell_to_node(map, 0, 0).empty());
  CHECK(map.navigable[spec.index(12, 10)] == 1);

  TopoMap lone(1);
  lone.update(0, NodeId{4}, Pose::identity(), pano, {}, PointCloud(1));
  CHECK(local_action_space(lone, Pose::identity(), spec).size() == 1);

  // Two neighbors in one cell are both registered in insertion order.
  TopoMap twin(1);
  twin.update(0, NodeId{0}, Pose::identity(), pano,
              std::vector<Candidate>{{NodeId{5}, Vec3(2.0, 0.05, 0), 0}, {NodeId{3}, Vec3(2.0, -0.05, 0), 0}},
              PointCloud(1));
  MetricMap tm(spec, 1);
  local_action_space(twin, Pose::identity(), spec, &tm);
  CHECK(cell_to_node(tm, 14, 10) == std::vector<NodeId>{NodeId{5}, NodeId{3}});
}

TEST_CASE("local action space equals per-node projection") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-6.0, 6.0);
  MapSpec spec;
  for (int trial = 0; trial < 20; ++trial) {
    const Pose agent = Pose::from_yaw(d(rng), Vec3(d(rng), d(rng), 0));
    TopoMap topo(1);
    std::vector<Candidate> cands;
    for (std::uint32_t i = 1; i <= 6; ++i) cands.push_back({NodeId{i}, Vec3(d(rng), d(rng), 0), 0});
    topo.update(0, NodeId{0}, agent, std::vector<double>{0.0}, cands, PointCloud(1));
    MetricMap map(spec, 1);
    const auto la = local_action_space(topo, agent, spec, &map);
    REQUIRE(la.size() == 7);
    for (const auto& a : la) {
      const auto ref = node_to_cell(agent, topo.node(a.node).position, spec);
      CHECK((a.u == ref.u && a.v == ref.v));
      const auto& reg = cell_to_node(map, a.u, a.v);
      CHECK(std::find(reg.begin(), reg.end(), a.node) != reg.end());
    }
    std::size_t nav = 0;
    for (auto n : map.navigable) nav += n;
    CHECK(nav <= 7);
  }
}
