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

#include "hnav/topo_map.hpp"
#include "oracles.hpp"

using namespace hnav;

namespace {

constexpr int kDim = 2;

NodeId N(std::uint32_t v) { return NodeId{v}; }

Pose at(double x, double y) { return Pose::from_yaw(0.0, Vec3(x, y, 0)); }

// K = 2 views; view k embedding = (base + k, base - k).
std::vector<double> pano(double base) { return {base, base, base + 1, base - 1}; }

PointCloud cloud() { return PointCloud(kDim); }

struct Graph {
  std::vector<Vec3> pos;
  std::vector<std::vector<int>> adj;
};

Graph random_graph(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Graph g;
  for (int i = 0; i < n; ++i) g.pos.emplace_back(u(rng), u(rng), 0.0);
  g.adj.resize(static_cast<std::size_t>(n));
  auto link = [&](int a, int b) {
    auto& la = g.adj[static_cast<std::size_t>(a)];
    if (a == b || std::find(la.begin(), la.end(), b) != la.end()) return;
    la.push_back(b);
    g.adj[static_cast<std::size_t>(b)].push_back(a);
  };
  for (int i = 1; i < n; ++i) link(i, static_cast<int>(rng() % static_cast<unsigned>(i)));
  for (int e = 0; e < n; ++e) link(static_cast<int>(rng() % n), static_cast<int>(rng() % n));
  return g;
}

// Visits every node once; candidates are the graph neighbors.
TopoMap explore(const Graph& g) {
  TopoMap m(kDim);
  for (std::size_t i = 0; i < g.pos.size(); ++i) {
    std::vector<Candidate> cands;
    for (int b : g.adj[i]) cands.push_back({N(static_cast<std::uint32_t>(b)), g.pos[static_cast<std::size_t>(b)], 0});
    m.update(static_cast<int>(i), N(static_cast<std::uint32_t>(i)), Pose::from_yaw(0.0, g.pos[i]),
             pano(1.0), cands, cloud());
  }
  return m;
}

}  // namespace

TEST_CASE("first update and global action space") {
  TopoMap m(kDim);
  m.update(0, N(0), at(0, 0), pano(1.0), std::vector<Candidate>{{N(1), Vec3(1, 0, 0), 0}, {N(2), Vec3(0, 1, 0), 1}}, cloud());
  CHECK(m.nodes().size() == 4);
  CHECK(m.edge_count() == 2);
  CHECK(m.current() == N(0));
  CHECK(m.node(N(0)).kind == NodeKind::kCurrent);
  CHECK(m.node(kStopNode).kind == NodeKind::kStop);
  CHECK(m.global_action_space() == std::vector<NodeId>{kStopNode, N(1), N(2)});
  CHECK(m.node(N(0)).feature == std::vector<double>{1.5, 0.5});
  CHECK(m.node(N(1)).feature == std::vector<double>{1.0, 1.0});
  CHECK(m.node(N(0)).cache.has_value());
  CHECK_FALSE(m.node(N(1)).cache.has_value());

  // Move to 1; candidates {0, 3}.
  m.update(1, N(1), at(1, 0), pano(3.0), std::vector<Candidate>{{N(0), Vec3(0, 0, 0), 0}, {N(3), Vec3(2, 0, 0), 0}}, cloud());
  CHECK(m.global_action_space() == std::vector<NodeId>{kStopNode, N(2), N(0), N(3)});
  CHECK(m.node(N(0)).kind == NodeKind::kVisited);
  CHECK(m.node(N(1)).last_visit_step == 1);
  int currents = 0;
  int stops = 0;
  for (const auto& n : m.nodes()) {
    currents += n.kind == NodeKind::kCurrent;
    stops += n.kind == NodeKind::kStop;
  }
  CHECK(currents == 1);
  CHECK(stops == 1);
}

TEST_CASE("unexplored running mean and revisit overwrite") {
  TopoMap m(kDim);
  m.update(0, N(0), at(0, 0), pano(1.0), std::vector<Candidate>{{N(2), Vec3(1, 1, 0), 0}}, cloud());
  m.update(1, N(1), at(2, 0), pano(5.0), std::vector<Candidate>{{N(2), Vec3(1, 1, 0), 1}, {N(0), Vec3(0, 0, 0), 0}}, cloud());
  CHECK(m.node(N(2)).obs_count == 2);
  CHECK(m.node(N(2)).feature == std::vector<double>{(1.0 + 6.0) / 2, (1.0 + 4.0) / 2});
  // Visited node 0 keeps its panorama feature while seen as a candidate.
  CHECK(m.node(N(0)).feature == std::vector<double>{1.5, 0.5});
  m.update(2, N(0), at(0, 0), pano(9.0), {}, cloud());
  CHECK(m.node(N(0)).feature == std::vector<double>{9.5, 8.5});
  CHECK(m.node(N(0)).last_visit_step == 2);
}

TEST_CASE("isolated node and error cases") {
  TopoMap m(kDim);
  m.update(0, N(7), at(0, 0), pano(0.0), {}, cloud());
  CHECK(m.global_action_space() == std::vector<NodeId>{kStopNode});
  CHECK(m.hop_distance(N(7), N(7)) == 0);
  CHECK(m.shortest_path(N(7), N(7)) == std::vector<NodeId>{N(7)});
  CHECK_THROWS_AS(m.node(N(99)), InvalidNodeError);
  CHECK_THROWS_AS(m.update(1, kStopNode, at(0, 0), pano(0.0), {}, cloud()), InvalidNodeError);
  CHECK_THROWS_AS(m.update(1, N(1), at(0, 0), std::vector<double>{1.0, 2.0, 3.0}, {}, cloud()), DimensionError);
}

TEST_CASE("hop distance on a chain and unreachable pairs") {
  TopoMap m(kDim);
  m.update(0, N(0), at(0, 0), pano(0), std::vector<Candidate>{{N(1), Vec3(1, 0, 0), 0}}, cloud());
  m.update(1, N(1), at(1, 0), pano(0), std::vector<Candidate>{{N(2), Vec3(2, 0, 0), 0}}, cloud());
  m.update(2, N(2), at(2, 0), pano(0), {}, cloud());
  CHECK(m.hop_distance(N(0), N(2)) == 2);
  m.update(3, N(5), at(9, 9), pano(0), {}, cloud());
  CHECK_THROWS_AS(m.hop_distance(N(0), N(5)), UnreachableError);
  CHECK_THROWS_AS(m.shortest_path(N(5), N(0)), UnreachableError);
}

TEST_CASE("shortest path prefers the cheaper two-hop route") {
  TopoMap m(kDim);
  // Triangle 0-1 (1 m), 1-2 (1 m), 0-2 (~1.9 m) with 1 slightly off the line.
  const Vec3 p0(0, 0, 0), p1(0.95, 0.3, 0), p2(1.9, 0, 0);
  m.update(0, N(0), Pose::from_yaw(0, p0), pano(0), std::vector<Candidate>{{N(1), p1, 0}, {N(2), p2, 0}}, cloud());
  m.update(1, N(1), Pose::from_yaw(0, p1), pano(0), std::vector<Candidate>{{N(2), p2, 0}}, cloud());
  m.update(2, N(0), Pose::from_yaw(0, p0), pano(0), {}, cloud());
  CHECK(m.shortest_path(N(0), N(2)) == std::vector<NodeId>{N(0), N(2)});

  TopoMap t(kDim);
  const Vec3 a(0, 0, 0), b(0.5, 0.01, 0), c(1.0, 0, 0);
  t.update(0, N(0), Pose::from_yaw(0, a), pano(0), std::vector<Candidate>{{N(1), b, 0}, {N(2), c, 0}}, cloud());
  t.update(1, N(1), Pose::from_yaw(0, b), pano(0), std::vector<Candidate>{{N(2), c, 0}}, cloud());
  // Unexplored 2 is reachable directly from 0 (1 m) or via visited 1 (~1 m).
  const auto p = t.shortest_path(N(1), N(2));
  CHECK(p == std::vector<NodeId>{N(1), N(2)});
}

TEST_CASE("hops and paths match Floyd-Warshall and Bellman-Ford") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = random_graph(rng, 12);
    const TopoMap m = explore(g);
    const int n = 12;
    oracle::Mat hop(n, std::vector<double>(n, oracle::kInf));
    std::vector<std::tuple<int, int, double>> edges;
    for (int a = 0; a < n; ++a)
      for (int b : g.adj[static_cast<std::size_t>(a)]) {
        hop[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1.0;
        if (a < b) edges.emplace_back(a, b, (g.pos[static_cast<std::size_t>(a)] - g.pos[static_cast<std::size_t>(b)]).norm());
      }
    const auto fw = oracle::floyd_warshall(hop);
    for (int a = 0; a < n; ++a) {
      const auto bf = oracle::bellman_ford(n, edges, a);
      for (int b = 0; b < n; ++b) {
        const int h = m.hop_distance(N(static_cast<std::uint32_t>(a)), N(static_cast<std::uint32_t>(b)));
        CHECK(h == static_cast<int>(fw[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]));
        const auto path = m.shortest_path(N(static_cast<std::uint32_t>(a)), N(static_cast<std::uint32_t>(b)));
        CHECK(path.front() == N(static_cast<std::uint32_t>(a)));
        CHECK(path.back() == N(static_cast<std::uint32_t>(b)));
        CHECK(std::abs(m.path_length(path) - bf[static_cast<std::size_t>(b)]) < 1e-9);
        for (int c = 0; c < n; ++c) {
          CHECK(h <= m.hop_distance(N(static_cast<std::uint32_t>(a)), N(static_cast<std::uint32_t>(c))) +
                         m.hop_distance(N(static_cast<std::uint32_t>(c)), N(static_cast<std::uint32_t>(b))));
        }
      }
    }
    // Determinism of replay.
    const TopoMap again = explore(g);
    CHECK(again.global_action_space() == m.global_action_space());
    CHECK(again.edges().size() == m.edges().size());
  }
}

TEST_CASE("spatial affinity matches pairwise norms") {
  std::mt19937_64 rng(6);
  const Graph g = random_graph(rng, 5);
  const TopoMap m = explore(g);
  std::vector<NodeId> order{kStopNode, N(0), N(1), N(2), N(3), N(4)};
  const auto a = m.spatial_affinity(order);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double ref = 0.0;
      if (i > 0 && j > 0) ref = (g.pos[i - 1] - g.pos[j - 1]).norm();
      CHECK(std::abs(a[i * 6 + j] - ref) < 1e-9);
    }
  }
  TopoMap two(kDim);
  two.update(0, N(0), at(0, 0), pano(0), std::vector<Candidate>{{N(1), Vec3(3, 0, 0), 0}}, cloud());
  CHECK(two.spatial_affinity(std::vector<NodeId>{N(0), N(1)}) == std::vector<double>{0, 3, 3, 0});
  CHECK(two.spatial_affinity(std::vector<NodeId>{N(0)}) == std::vector<double>{0});
}
