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

// Procedural indoor worlds: rooms on a square grid joined by doorways, a
// navigation graph of viewpoints, ray-cast panoramic observations, expert
// episodes and templated instructions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hnav/common.hpp"
#include "hnav/geometry.hpp"

namespace hnav {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kMask = 1;

  Vocabulary();

  int size() const { return static_cast<int>(words_.size()); }
  int id(const std::string& word) const;  // throws VocabError
  const std::string& word(int id) const;
  int class_token(int semantic_class) const;
  const std::string& class_name(int semantic_class) const;
  static int max_classes();

  std::string detokenize(const std::vector<int>& ids) const;

 private:
  std::vector<std::string> words_;
  int first_class_ = 0;
};

const Vocabulary& vocabulary();

struct WorldParams {
  int n_rooms = 4;
  int nodes_per_room = 4;
  int view_dim = 32;
  int num_classes = 8;
  int views = 12;
  double room_size = 5.0;
  double camera_height = 1.5;
  double ceiling_height = 3.0;
  double door_width = 1.2;
  double door_height = 2.2;
  double feature_noise = 0.1;
  double signature_noise = 0.3;
  double node_jitter = 0.2;
  CameraIntrinsics camera;

  void validate() const;
};

struct Room {
  int id = 0;
  int gx = 0;
  int gy = 0;
  int semantic_class = 0;
  std::vector<double> signature;  // view_dim

  double x0(double size) const { return gx * size; }
  double y0(double size) const { return gy * size; }
};

struct Door {
  int room_a = 0;
  int room_b = 0;
};

struct WorldNode {
  NodeId id;
  Vec3 position = Vec3::Zero();
  int room = 0;
};

struct WorldEdge {
  NodeId a;
  NodeId b;
  double length = 0.0;
};

struct View {
  double heading = 0.0;
  double elevation = 0.0;
  Pose pose;                   // camera pose in the world frame
  std::vector<double> feature; // view_dim, mean of the grid features
  FeatureGrid grid;
  DepthGrid depth;
  std::vector<int> classes;    // per pixel semantic class id
  std::vector<SemanticBits> semantic_bits() const;
};

struct Observation {
  NodeId node;
  std::vector<View> views;
};

struct RayHit {
  double distance = 0.0;
  int room = -1;  // room the ray terminates in
};

class World {
 public:
  World() = default;

  std::uint64_t seed = 0;
  WorldParams params;
  std::vector<Room> rooms;
  std::vector<Door> doors;
  std::vector<WorldNode> nodes;
  std::vector<WorldEdge> edges;

  /// Rebuilds lookup tables after the public fields were filled in.
  void finalize();

  bool contains(NodeId id) const;
  const WorldNode& node(NodeId id) const;  // throws InvalidNodeError
  const Room& room(int id) const { return rooms.at(static_cast<std::size_t>(id)); }
  int room_at(double x, double y) const;  // -1 outside every room
  std::vector<NodeId> neighbors(NodeId id) const;
  double edge_length(NodeId a, NodeId b) const;  // negative if not adjacent
  bool has_door(int room_a, int room_b) const;

  /// Dijkstra over edge lengths; ties prefer the smaller node id.
  std::vector<NodeId> shortest_path(NodeId from, NodeId to) const;
  double shortest_distance(NodeId from, NodeId to) const;
  std::vector<double> distances_from(NodeId from) const;
  double path_length(const std::vector<NodeId>& path) const;

  RayHit cast_ray(const Vec3& origin, const Vec3& direction) const;
  Observation observe(NodeId id) const;
  int semantic_class_of(NodeId id) const { return rooms[static_cast<std::size_t>(node(id).room)].semantic_class; }

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
  std::vector<std::vector<int>> grid_;  // room id per grid cell or -1
  int grid_w_ = 0;
  int grid_h_ = 0;
};

World generate_world(std::uint64_t seed, const WorldParams& params);

enum class EpisodeKind { kGoal, kFidelity };

const char* episode_kind_name(EpisodeKind k);
EpisodeKind parse_episode_kind(const std::string& s);

struct Episode {
  std::uint64_t id = 0;
  int world_index = 0;
  EpisodeKind kind = EpisodeKind::kGoal;
  NodeId start;
  NodeId target;
  double start_heading = 0.0;
  std::vector<NodeId> expert_path;
  std::vector<int> instruction;
  double success_radius = 3.0;
};

Episode generate_episode(const World& world, std::uint64_t seed, EpisodeKind kind);

/// Views' headings for a K-view panorama, world-aligned.
double view_heading(int k, int views);

/// Index of the panorama view whose heading is closest to the bearing from
/// `from` to `to`.
int view_index_towards(const Vec3& from, const Vec3& to, int views);

}  // namespace hnav
