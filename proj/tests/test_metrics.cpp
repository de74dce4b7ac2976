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

#include "hnav/metrics.hpp"
#include "oracles.hpp"

using namespace hnav;

namespace {

std::vector<Vec3> random_path(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-8, 8);
  std::vector<Vec3> p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(u(rng), u(rng), 0.0);
  return p;
}

}  // namespace

TEST_CASE("dtw and ndtw match the recursive oracle") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto q = random_path(rng, 1 + rng() % 9);
    const auto r = random_path(rng, 1 + rng() % 9);
    CHECK(dtw(q, r) == doctest::Approx(oracle::dtw(q, r)).epsilon(1e-12));
    const double n = ndtw(q, r);
    CHECK(n == doctest::Approx(oracle::ndtw(q, r)).epsilon(1e-12));
    CHECK((n > 0.0 && n <= 1.0));
    CHECK(dtw(q, r) == doctest::Approx(dtw(r, q)).epsilon(1e-12));
  }
}

TEST_CASE("ndtw properties") {
  std::mt19937_64 rng(2);
  const auto r = random_path(rng, 6);
  CHECK(ndtw(r, r) == 1.0);
  // Repeating a point costs nothing.
  auto stutter = r;
  stutter.insert(stutter.begin() + 2, r[2]);
  CHECK(ndtw(stutter, r) == 1.0);
  // Moving one point away lowers the score.
  auto off = r;
  off[3] += Vec3(2, 0, 0);
  CHECK(ndtw(off, r) < 1.0);
  const std::vector<Vec3> a{{0, 0, 0}}, b{{3, 4, 0}};
  CHECK(dtw(a, b) == 5.0);
  CHECK(ndtw(a, b) == doctest::Approx(std::exp(-5.0 / 3.0)));
  CHECK(ndtw(a, b, 5.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("episode metrics on expert, stop-at-start and detour trajectories") {
  WorldParams p;
  p.view_dim = 8;
  p.views = 4;
  const World w = generate_world(5, p);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Episode ep = generate_episode(w, s, EpisodeKind::kGoal);
    const MetricRecord m = evaluate(ep.expert_path, ep, w);
    CHECK(m.sr == 1.0);
    CHECK(m.osr == 1.0);
    CHECK(m.ne == 0.0);
    CHECK(m.spl == doctest::Approx(1.0));
    CHECK(m.ndtw == 1.0);
    CHECK(m.sdtw == 1.0);
    CHECK(m.tl == doctest::Approx(w.shortest_distance(ep.start, ep.target)));

    const std::vector<NodeId> stay{ep.start};
    const MetricRecord z = evaluate(stay, ep, w);
    CHECK(z.sr == 0.0);
    CHECK(z.spl == 0.0);
    CHECK(z.tl == 0.0);
    CHECK(z.ne == doctest::Approx((w.node(ep.start).position - w.node(ep.target).position).norm()));

    // Reach the goal then walk back: OSR but no SR.
    auto back = ep.expert_path;
    back.insert(back.end(), ep.expert_path.rbegin() + 1, ep.expert_path.rend());
    const MetricRecord o = evaluate(back, ep, w);
    CHECK(o.osr == 1.0);
    CHECK(o.sr == 0.0);
    CHECK(o.sdtw == 0.0);
    CHECK(o.ndtw < 1.0);
  }
}

TEST_CASE("aggregate averages records and reports rates in percent") {
  std::vector<MetricRecord> rs(4);
  for (int i = 0; i < 4; ++i) {
    rs[static_cast<std::size_t>(i)].tl = i;
    rs[static_cast<std::size_t>(i)].sr = i % 2;
    rs[static_cast<std::size_t>(i)].osr = 1.0;
    rs[static_cast<std::size_t>(i)].spl = 0.25 * i;
  }
  const MetricSummary s = aggregate(rs);
  CHECK(s.episodes == 4);
  CHECK(s.tl == 1.5);
  CHECK(s.sr == 50.0);
  CHECK(s.osr == 100.0);
  CHECK(s.spl == doctest::Approx(0.375));
  CHECK_THROWS_AS(aggregate(std::vector<MetricRecord>{}), DimensionError);
}
