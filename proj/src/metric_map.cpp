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

#include "hnav/metric_map.hpp"

#include <algorithm>
#include <cmath>

namespace hnav {

std::array<double, 3> polar_embedding(int u, int v, const MapSpec& spec) {
  if (u < 0 || u >= spec.u || v < 0 || v >= spec.v) {
    throw DimensionError("cell index out of range");
  }
  const int du = u - spec.center_u();
  const int dv = v - spec.center_v();
  if (du == 0 && dv == 0) return {1.0, 0.0, 0.0};
  const double x = du * spec.cell_size;
  const double y = dv * spec.cell_size;
  const double theta = std::atan2(y, x);
  const double corner = std::hypot(spec.half_extent_x(), spec.half_extent_y());
  return {std::cos(theta), std::sin(theta), std::hypot(x, y) / corner};
}

CellIndex node_to_cell(const Pose& agent_pose, const Vec3& node_position,
                       const MapSpec& spec) {
  const Vec3 ego = agent_pose.inverse().apply(node_position);
  const double fu = std::floor(ego.x() / spec.cell_size + 0.5) + spec.center_u();
  const double fv = std::floor(ego.y() / spec.cell_size + 0.5) + spec.center_v();
  CellIndex out;
  out.clamped = fu < 0 || fu >= spec.u || fv < 0 || fv >= spec.v;
  out.u = static_cast<int>(std::clamp(fu, 0.0, static_cast<double>(spec.u - 1)));
  out.v = static_cast<int>(std::clamp(fv, 0.0, static_cast<double>(spec.v - 1)));
  return out;
}

std::vector<LocalAction> local_action_space(const TopoMap& topo, const Pose& agent_pose,
                                            const MapSpec& spec, MetricMap* map) {
  const NodeId cur = topo.current();
  std::vector<LocalAction> out;
  auto push = [&](NodeId id, const Vec3& pos) {
    const CellIndex c = node_to_cell(agent_pose, pos, spec);
    out.push_back({id, c.u, c.v});
    if (map != nullptr) {
      const std::size_t idx = spec.index(c.u, c.v);
      map->navigable[idx] = 1;
      auto& reg = map->cell_nodes[idx];
      if (std::find(reg.begin(), reg.end(), id) == reg.end()) reg.push_back(id);
    }
  };
  push(cur, topo.node(cur).position);
  for (NodeId nb : topo.neighbors(cur)) push(nb, topo.node(nb).position);
  return out;
}

const std::vector<NodeId>& cell_to_node(const MetricMap& map, int u, int v) {
  if (u < 0 || u >= map.spec.u || v < 0 || v >= map.spec.v) {
    throw DimensionError("cell index out of range");
  }
  return map.cell_nodes[map.spec.index(u, v)];
}

}  // namespace hnav
