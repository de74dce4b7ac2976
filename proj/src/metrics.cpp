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

#include "hnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hnav {

double dtw(std::span<const Vec3> q, std::span<const Vec3> r) {
  if (q.empty() || r.empty()) throw DimensionError("dtw needs non-empty sequences");
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t m = r.size();
  std::vector<double> prev(m + 1, inf);
  std::vector<double> cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= q.size(); ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double d = (q[i - 1] - r[j - 1]).norm();
      cur[j] = d + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double ndtw(std::span<const Vec3> q, std::span<const Vec3> r, double threshold) {
  return std::exp(-dtw(q, r) / (static_cast<double>(r.size()) * threshold));
}

std::vector<Vec3> positions_of(const World& world, std::span<const NodeId> path) {
  std::vector<Vec3> out;
  out.reserve(path.size());
  for (NodeId id : path) out.push_back(world.node(id).position);
  return out;
}

MetricRecord evaluate(std::span<const NodeId> trajectory, const Episode& episode,
                      const World& world) {
  if (trajectory.empty()) throw InvalidNodeError("empty trajectory");
  const Vec3 goal = world.node(episode.target).position;
  MetricRecord m;
  m.episode_id = episode.id;
  m.tl = world.path_length(std::vector<NodeId>(trajectory.begin(), trajectory.end()));
  m.ne = (world.node(trajectory.back()).position - goal).norm();
  m.sr = m.ne < kSuccessRadius ? 1.0 : 0.0;
  for (NodeId id : trajectory) {
    if ((world.node(id).position - goal).norm() < kSuccessRadius) m.osr = 1.0;
  }
  const double best = world.shortest_distance(episode.start, episode.target);
  const double denom = std::max(best, m.tl);
  m.spl = denom > 0.0 ? m.sr * best / denom : m.sr;
  const auto q = positions_of(world, trajectory);
  const auto r = positions_of(world, episode.expert_path);
  m.ndtw = ndtw(q, r);
  m.sdtw = m.sr * m.ndtw;
  return m;
}

MetricSummary aggregate(std::span<const MetricRecord> records) {
  if (records.empty()) throw DimensionError("aggregate needs at least one record");
  MetricSummary s;
  s.episodes = records.size();
  for (const auto& r : records) {
    s.tl += r.tl;
    s.ne += r.ne;
    s.sr += r.sr;
    s.osr += r.osr;
    s.spl += r.spl;
    s.ndtw += r.ndtw;
    s.sdtw += r.sdtw;
  }
  const double n = static_cast<double>(records.size());
  s.tl /= n;
  s.ne /= n;
  s.sr = 100.0 * s.sr / n;
  s.osr = 100.0 * s.osr / n;
  s.spl /= n;
  s.ndtw /= n;
  s.sdtw /= n;
  return s;
}

}  // namespace hnav
