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

#include "hnav/geometry.hpp"
#include "hnav/topo_map.hpp"

namespace hnav {

/// Topology-guided map update. Gathers the cached clouds of every visited
/// node within `kappa` hops of `current`, re-expresses them in the current
/// egocentric frame and splats the union once.
MetricMap build_metric_map(const TopoMap& topo, NodeId current, int kappa,
                           const MapSpec& spec);

/// Same union as above, before splatting.
PointCloud gather_hop_clouds(const TopoMap& topo, NodeId current, int kappa);

}  // namespace hnav
