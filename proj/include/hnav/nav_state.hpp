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

// Per-episode agent memory: walks the environment graph, keeps the
// topological map with its cloud caches, and assembles the encoder inputs
// for the current decision step.

#include <vector>

#include "hnav/encoders.hpp"
#include "hnav/env.hpp"
#include "hnav/metric_map.hpp"
#include "hnav/topo_map.hpp"

namespace hnav {

struct MapConfig {
  MapSpec spec;
  int kappa = 1;  // hop radius of the topology-guided map update
};

/// Everything the encoders consume at one decision step.
struct StepInputs {
  std::vector<NodeId> actions;     // global action space, Stop first
  std::vector<NodeId> node_order;  // actions followed by the current node
  std::vector<NodeEmbeddingInput> nodes;
  nn::Matrix affinity;             // |node_order| x |node_order|
  MetricMap map;
  std::vector<LocalAction> local;
  NodeId current;
  Pose agent_pose;
};

class NavState {
 public:
  NavState(const World& world, Encoders& encoders, const MapConfig& cfg);

  /// Moves the agent to `node` facing `heading` and registers the panorama.
  void arrive(NodeId node, double heading);

  /// Moves along an edge: the heading becomes the edge bearing.
  void move_to(NodeId node);

  StepInputs inputs() const;

  const TopoMap& topo() const { return topo_; }
  NodeId current() const { return current_; }
  double heading() const { return heading_; }
  int step() const { return step_; }
  Pose agent_pose() const;
  /// Environment nodes visited so far, start first.
  const std::vector<NodeId>& trajectory() const { return trajectory_; }

 private:
  const World& world_;
  Encoders& enc_;
  MapConfig cfg_;
  TopoMap topo_;
  NodeId current_;
  double heading_ = 0.0;
  int step_ = -1;
  std::vector<NodeId> trajectory_;
};

/// Cloud of all K views of an observation, lifted with semantics, in the
/// egocentric frame of `agent_pose`.
PointCloud observation_cloud(const Observation& obs, const CameraIntrinsics& cam,
                             const Pose& agent_pose);

}  // namespace hnav
