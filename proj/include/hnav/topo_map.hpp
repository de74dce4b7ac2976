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

// Incrementally built topological map: visited / current / unexplored nodes,
// symmetric distance-weighted edges, and per-node point cloud caches.

#include <optional>
#include <unordered_map>
#include <vector>

#include "hnav/common.hpp"
#include "hnav/geometry.hpp"

namespace hnav {

enum class NodeKind { kVisited, kCurrent, kUnexplored, kStop };

const char* node_kind_name(NodeKind k);

/// Egocentric cloud captured at a node together with the agent pose it was
/// captured from.
struct CloudCache {
  PointCloud cloud;
  Pose pose;
};

struct TopoNode {
  NodeId id;
  NodeKind kind = NodeKind::kUnexplored;
  Vec3 position = Vec3::Zero();
  std::vector<double> feature;
  int last_visit_step = 0;
  int obs_count = 0;
  std::optional<CloudCache> cache;
};

struct Candidate {
  NodeId id;
  Vec3 position;
  int view_index = 0;
};

struct TopoEdge {
  NodeId a;
  NodeId b;
  double distance = 0.0;
};

class TopoMap {
 public:
  explicit TopoMap(int feature_dim);

  int feature_dim() const { return dim_; }

  /// Registers the panorama taken at `current_id`: the node becomes Current
  /// with the mean pano embedding as its feature, candidates are inserted or
  /// updated, and current<->candidate edges are added.
  /// `pano_embeddings` is K x D, row-major.
  void update(int step, NodeId current_id, const Pose& agent_pose,
              std::span<const double> pano_embeddings,
              std::span<const Candidate> candidates, PointCloud cache_cloud);

  /// Stop first, then every node ever observed as a candidate (excluding the
  /// Current node) in first-observation order.
  std::vector<NodeId> global_action_space() const;

  /// Unweighted hop count over Visited and Current nodes.
  int hop_distance(NodeId i, NodeId j) const;

  /// Dijkstra over edge distances. Intermediate nodes must be Visited or
  /// Current; ties prefer the smaller insertion index.
  std::vector<NodeId> shortest_path(NodeId from, NodeId to) const;
  double path_length(std::span<const NodeId> path) const;

  /// Pairwise Euclidean distances in the given order. Stop rows/cols are 0.
  /// Returned row-major, |order| x |order|.
  std::vector<double> spatial_affinity(std::span<const NodeId> order) const;

  bool contains(NodeId id) const { return index_.contains(id); }
  const TopoNode& node(NodeId id) const;
  // All nodes in insertion order; index 0 is the Stop node.
  const std::vector<TopoNode>& nodes() const { return nodes_; }
  std::size_t insertion_index(NodeId id) const;
  NodeId current() const;
  bool has_current() const { return current_ >= 0; }
  std::vector<NodeId> neighbors(NodeId id) const;
  std::vector<TopoEdge> edges() const;
  std::size_t edge_count() const;
  double edge_distance(NodeId a, NodeId b) const;  // negative if absent

 private:
  std::size_t ensure_node(NodeId id, const Vec3& position);
  void add_edge(std::size_t a, std::size_t b);
  bool traversable(std::size_t idx) const;

  int dim_;
  std::vector<TopoNode> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
  std::vector<NodeId> candidate_order_;
  std::unordered_map<NodeId, bool> seen_as_candidate_;
  long current_ = -1;
};

}  // namespace hnav
