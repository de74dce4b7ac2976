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

// Egocentric grid helpers: polar cell embeddings, node <-> cell projection,
// and the local action space registered on a metric map.

#include <array>
#include <vector>

#include "hnav/geometry.hpp"
#include "hnav/topo_map.hpp"

namespace hnav {

/// [cos theta, sin theta, dis] of a cell relative to the central cell.
/// dis is the cell-center distance divided by the distance from the map
/// center to its outer corner, so it stays in [0, 1).
std::array<double, 3> polar_embedding(int u, int v, const MapSpec& spec);

struct CellIndex {
  int u = 0;
  int v = 0;
  bool clamped = false;
};

/// Projects a world position into the agent's egocentric grid, clamping to
/// the boundary when it falls outside.
CellIndex node_to_cell(const Pose& agent_pose, const Vec3& node_position,
                       const MapSpec& spec);

struct LocalAction {
  NodeId node;
  int u = 0;
  int v = 0;
};

/// Current node plus its one-hop neighbors, each projected to a cell. When
/// `map` is given its navigable mask and cell registry are filled in.
std::vector<LocalAction> local_action_space(const TopoMap& topo, const Pose& agent_pose,
                                            const MapSpec& spec, MetricMap* map = nullptr);

/// Nodes registered for a cell, in registration order (possibly empty).
const std::vector<NodeId>& cell_to_node(const MetricMap& map, int u, int v);

}  // namespace hnav
