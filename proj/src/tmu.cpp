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

#include "hnav/tmu.hpp"

#include <deque>
#include <string>

namespace hnav {

PointCloud gather_hop_clouds(const TopoMap& topo, NodeId current, int kappa) {
  if (kappa < 0) throw DimensionError("kappa must be non-negative");
  const TopoNode& cur = topo.node(current);
  if (cur.kind != NodeKind::kCurrent) {
    throw InvalidNodeError("node " + to_string(current) + " is not the current node");
  }
  if (!cur.cache) throw CacheMissError("current node has no cached cloud");

  const auto& nodes = topo.nodes();
  std::vector<int> hops(nodes.size(), -1);
  const std::size_t start = topo.insertion_index(current);
  hops[start] = 0;
  std::deque<std::size_t> queue{start};
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop_front();
    if (hops[x] >= kappa) continue;
    for (NodeId nb : topo.neighbors(nodes[x].id)) {
      const std::size_t j = topo.insertion_index(nb);
      const NodeKind k = nodes[j].kind;
      if (hops[j] >= 0 || (k != NodeKind::kVisited && k != NodeKind::kCurrent)) continue;
      hops[j] = hops[x] + 1;
      queue.push_back(j);
    }
  }

  // The current cloud goes in untouched so kappa = 0 reproduces the
  // single-step map bit for bit.
  PointCloud out = cur.cache->cloud;
  const Pose world_to_current = cur.cache->pose.inverse();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j == start || hops[j] < 0) continue;
    const TopoNode& n = nodes[j];
    if (!n.cache) throw CacheMissError("node " + to_string(n.id) + " has no cached cloud");
    const Pose align = world_to_current * n.cache->pose;
    out.append(transform_pointcloud(n.cache->cloud, align));
  }
  return out;
}

MetricMap build_metric_map(const TopoMap& topo, NodeId current, int kappa,
                           const MapSpec& spec) {
  return splat(gather_hop_clouds(topo, current, kappa), spec);
}

}  // namespace hnav
