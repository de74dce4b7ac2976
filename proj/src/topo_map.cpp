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

#include "hnav/topo_map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <string>

namespace hnav {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::kVisited: return "visited";
    case NodeKind::kCurrent: return "current";
    case NodeKind::kUnexplored: return "unexplored";
    case NodeKind::kStop: return "stop";
  }
  return "unknown";
}

TopoMap::TopoMap(int feature_dim) : dim_(feature_dim) {
  TopoNode stop;
  stop.id = kStopNode;
  stop.kind = NodeKind::kStop;
  stop.feature.assign(static_cast<std::size_t>(dim_), 0.0);
  nodes_.push_back(std::move(stop));
  index_[kStopNode] = 0;
  adj_.emplace_back();
}

const TopoNode& TopoMap::node(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InvalidNodeError("node " + to_string(id) + " not in map");
  return nodes_[it->second];
}

std::size_t TopoMap::insertion_index(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InvalidNodeError("node " + to_string(id) + " not in map");
  return it->second;
}

NodeId TopoMap::current() const {
  if (current_ < 0) throw InvalidNodeError("map has no current node");
  return nodes_[static_cast<std::size_t>(current_)].id;
}

std::size_t TopoMap::ensure_node(NodeId id, const Vec3& position) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  TopoNode n;
  n.id = id;
  n.kind = NodeKind::kUnexplored;
  n.position = position;
  n.feature.assign(static_cast<std::size_t>(dim_), 0.0);
  nodes_.push_back(std::move(n));
  adj_.emplace_back();
  index_[id] = nodes_.size() - 1;
  return nodes_.size() - 1;
}

void TopoMap::add_edge(std::size_t a, std::size_t b) {
  for (const auto& [nb, d] : adj_[a]) {
    if (nb == b) return;
  }
  const double d = (nodes_[a].position - nodes_[b].position).norm();
  if (!(d > 0.0)) {
    throw InvalidNodeError("nodes " + to_string(nodes_[a].id) + " and " +
                           to_string(nodes_[b].id) + " coincide");
  }
  adj_[a].emplace_back(b, d);
  adj_[b].emplace_back(a, d);
}

void TopoMap::update(int step, NodeId current_id, const Pose& agent_pose,
                     std::span<const double> pano_embeddings,
                     std::span<const Candidate> candidates, PointCloud cache_cloud) {
  if (current_id == kStopNode) throw InvalidNodeError("stop cannot be the current node");
  const auto dim = static_cast<std::size_t>(dim_);
  if (pano_embeddings.empty() || pano_embeddings.size() % dim != 0) {
    throw DimensionError("pano embeddings must be K x " + std::to_string(dim_));
  }
  const std::size_t views = pano_embeddings.size() / dim;

  const std::size_t cur = ensure_node(current_id, agent_pose.translation());
  if (current_ >= 0 && static_cast<std::size_t>(current_) != cur) {
    nodes_[static_cast<std::size_t>(current_)].kind = NodeKind::kVisited;
  }
  current_ = static_cast<long>(cur);
  {
    TopoNode& n = nodes_[cur];
    n.kind = NodeKind::kCurrent;
    n.position = agent_pose.translation();
    std::fill(n.feature.begin(), n.feature.end(), 0.0);
    for (std::size_t k = 0; k < views; ++k) {
      for (std::size_t j = 0; j < dim; ++j) n.feature[j] += pano_embeddings[k * dim + j];
    }
    for (auto& x : n.feature) x /= static_cast<double>(views);
    n.last_visit_step = step;
    n.obs_count += 1;
    n.cache = CloudCache{std::move(cache_cloud), agent_pose};
  }

  for (const Candidate& c : candidates) {
    if (c.id == current_id || c.id == kStopNode) continue;
    if (c.view_index < 0 || static_cast<std::size_t>(c.view_index) >= views) {
      throw DimensionError("candidate view index out of range");
    }
    const std::size_t idx = ensure_node(c.id, c.position);
    TopoNode& n = nodes_[idx];
    if (n.kind == NodeKind::kUnexplored) {
      const double* e = pano_embeddings.data() + static_cast<std::size_t>(c.view_index) * dim;
      const double prev = n.obs_count;
      for (std::size_t j = 0; j < dim; ++j) {
        n.feature[j] = (n.feature[j] * prev + e[j]) / (prev + 1.0);
      }
      n.obs_count += 1;
    }
    if (!seen_as_candidate_[c.id]) {
      seen_as_candidate_[c.id] = true;
      candidate_order_.push_back(c.id);
    }
    add_edge(cur, idx);
  }
}

std::vector<NodeId> TopoMap::global_action_space() const {
  std::vector<NodeId> out;
  out.reserve(candidate_order_.size() + 1);
  out.push_back(kStopNode);
  for (NodeId id : candidate_order_) {
    if (current_ >= 0 && id == nodes_[static_cast<std::size_t>(current_)].id) continue;
    out.push_back(id);
  }
  return out;
}

bool TopoMap::traversable(std::size_t idx) const {
  const NodeKind k = nodes_[idx].kind;
  return k == NodeKind::kVisited || k == NodeKind::kCurrent;
}

int TopoMap::hop_distance(NodeId i, NodeId j) const {
  const std::size_t a = insertion_index(i);
  const std::size_t b = insertion_index(j);
  if (!traversable(a) || !traversable(b)) {
    throw InvalidNodeError("hop distance is defined over visited nodes only");
  }
  if (a == b) return 0;
  std::vector<int> hops(nodes_.size(), -1);
  std::deque<std::size_t> queue{a};
  hops[a] = 0;
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    for (const auto& [nb, d] : adj_[x]) {
      if (hops[nb] >= 0 || !traversable(nb)) continue;
      hops[nb] = hops[x] + 1;
      if (nb == b) return hops[nb];
      queue.push_back(nb);
    }
  }
  throw UnreachableError("no visited path between " + to_string(i) + " and " + to_string(j));
}

std::vector<NodeId> TopoMap::shortest_path(NodeId from, NodeId to) const {
  const std::size_t src = insertion_index(from);
  const std::size_t dst = insertion_index(to);
  if (src == dst) return {from};
  auto allowed = [&](std::size_t idx) {
    return idx == src || idx == dst || traversable(idx);
  };
  // Distances to the destination, then a forward walk that takes the
  // smallest-index neighbor lying on some shortest path.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(nodes_.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[dst] = 0.0;
  pq.emplace(0.0, dst);
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (d > dist[x]) continue;
    if (x != dst && !allowed(x)) continue;
    for (const auto& [nb, w] : adj_[x]) {
      if (!allowed(nb)) continue;
      // Only the endpoints may be non-traversable, and `to` may not be passed through.
      if (nb == dst) continue;
      if (x == src) continue;
      const double nd = d + w;
      if (nd < dist[nb]) {
        dist[nb] = nd;
        pq.emplace(nd, nb);
      }
    }
  }
  if (dist[src] == kInf) {
    throw UnreachableError("no path from " + to_string(from) + " to " + to_string(to));
  }
  std::vector<NodeId> path{from};
  std::size_t x = src;
  while (x != dst) {
    std::size_t best = nodes_.size();
    for (const auto& [nb, w] : adj_[x]) {
      if (!allowed(nb) || dist[nb] == kInf) continue;
      if (nb == src) continue;
      const double via = w + dist[nb];
      if (std::abs(via - dist[x]) <= 1e-9 * std::max(1.0, dist[x]) && nb < best) best = nb;
    }
    if (best == nodes_.size()) throw UnreachableError("shortest path reconstruction failed");
    x = best;
    path.push_back(nodes_[x].id);
  }
  return path;
}

double TopoMap::path_length(std::span<const NodeId> path) const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double d = edge_distance(path[i - 1], path[i]);
    if (d < 0.0) throw UnreachableError("path uses a missing edge");
    total += d;
  }
  return total;
}

std::vector<double> TopoMap::spatial_affinity(std::span<const NodeId> order) const {
  const std::size_t n = order.size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (order[i] == kStopNode) continue;
    const Vec3& pi = node(order[i]).position;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (order[j] == kStopNode) continue;
      const double d = (pi - node(order[j]).position).norm();
      out[i * n + j] = d;
      out[j * n + i] = d;
    }
  }
  return out;
}

std::vector<NodeId> TopoMap::neighbors(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [nb, d] : adj_[insertion_index(id)]) out.push_back(nodes_[nb].id);
  return out;
}

std::vector<TopoEdge> TopoMap::edges() const {
  std::vector<TopoEdge> out;
  for (std::size_t a = 0; a < adj_.size(); ++a) {
    for (const auto& [b, d] : adj_[a]) {
      if (a < b) out.push_back({nodes_[a].id, nodes_[b].id, d});
    }
  }
  return out;
}

std::size_t TopoMap::edge_count() const {
  std::size_t n = 0;
  for (const auto& a : adj_) n += a.size();
  return n / 2;
}

double TopoMap::edge_distance(NodeId a, NodeId b) const {
  const std::size_t ia = insertion_index(a);
  const std::size_t ib = insertion_index(b);
  for (const auto& [nb, d] : adj_[ia]) {
    if (nb == ib) return d;
  }
  return -1.0;
}

}  // namespace hnav
