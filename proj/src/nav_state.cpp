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

#include "hnav/nav_state.hpp"

#include "hnav/tmu.hpp"

#include <cmath>
#include <numbers>

namespace hnav {

namespace {

double wrap(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

PointCloud observation_cloud(const Observation& obs, const CameraIntrinsics& cam,
                             const Pose& agent_pose) {
  const Pose to_ego = agent_pose.inverse();
  PointCloud out;
  for (const View& v : obs.views) {
    const auto bits = v.semantic_bits();
    out.append(lift(v.grid, v.depth, cam, to_ego * v.pose, bits));
  }
  return out;
}

NavState::NavState(const World& world, Encoders& encoders, const MapConfig& cfg)
    : world_(world), enc_(encoders), cfg_(cfg), topo_(encoders.config().dim) {
  cfg_.spec.validate();
  if (cfg_.kappa < 0) throw DimensionError("kappa must be non-negative");
}

Pose NavState::agent_pose() const {
  return Pose::from_yaw(heading_, world_.node(current_).position);
}

void NavState::arrive(NodeId node, double heading) {
  const WorldNode& wn = world_.node(node);
  current_ = node;
  heading_ = heading;
  ++step_;
  trajectory_.push_back(node);

  const Observation obs = world_.observe(node);
  const int k = static_cast<int>(obs.views.size());
  nn::Matrix feats(k, world_.params.view_dim);
  nn::Matrix angles(k, 2);
  for (int i = 0; i < k; ++i) {
    const View& v = obs.views[static_cast<std::size_t>(i)];
    std::copy(v.feature.begin(), v.feature.end(), feats.row(i));
    angles(i, 0) = wrap(v.heading - heading_);
    angles(i, 1) = v.elevation;
  }
  nn::Matrix pano;
  {
    nn::NoGradGuard guard;
    pano = enc_.pano_encode(feats, angles).value();
  }

  std::vector<Candidate> cands;
  for (NodeId nb : world_.neighbors(node)) {
    const Vec3& p = world_.node(nb).position;
    cands.push_back({nb, p, view_index_towards(wn.position, p, k)});
  }
  const Pose pose = agent_pose();
  topo_.update(step_, node, pose, pano.data, cands,
               observation_cloud(obs, world_.params.camera, pose));
}

void NavState::move_to(NodeId node) {
  const Vec3 d = world_.node(node).position - world_.node(current_).position;
  arrive(node, std::atan2(d.y(), d.x()));
}

StepInputs NavState::inputs() const {
  StepInputs in;
  in.current = current_;
  in.agent_pose = agent_pose();
  in.actions = topo_.global_action_space();
  in.node_order = in.actions;
  in.node_order.push_back(current_);
  const Vec3 here = world_.node(current_).position;
  for (NodeId id : in.node_order) {
    NodeEmbeddingInput e;
    if (id == kStopNode) {
      e.kind = NodeKind::kStop;
    } else {
      const TopoNode& tn = topo_.node(id);
      e.kind = tn.kind;
      e.feature = tn.feature;
      const Vec3 d = tn.position - here;
      e.rel_distance = d.norm();
      e.rel_heading = e.rel_distance > 0.0 ? wrap(std::atan2(d.y(), d.x()) - heading_) : 0.0;
      e.step = tn.kind == NodeKind::kUnexplored ? 0 : tn.last_visit_step;
    }
    in.nodes.push_back(std::move(e));
  }
  const int n = static_cast<int>(in.node_order.size());
  in.affinity = nn::Matrix(n, n, topo_.spatial_affinity(in.node_order));
  in.map = build_metric_map(topo_, current_, cfg_.kappa, cfg_.spec);
  in.local = local_action_space(topo_, in.agent_pose, cfg_.spec, &in.map);
  return in;
}

}  // namespace hnav
