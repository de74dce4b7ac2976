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

#include "hnav/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

namespace hnav {

namespace {

constexpr std::array<const char*, 17> kWords = {
    "exit", "the",   "room",  "turn",    "left",  "right", "go",   "straight", "through",
    "and",  "enter", "then",  "stop",    "walk",  "into",  "continue", "to"};

constexpr std::array<const char*, 40> kClassNames = {
    "kitchen", "bedroom",  "bathroom", "office",   "hallway",     "lounge",     "dining",
    "laundry", "garage",   "closet",   "library",  "gym",         "studio",     "nursery",
    "pantry",  "foyer",    "attic",    "basement", "balcony",     "porch",      "cellar",
    "den",     "sauna",    "theater",  "workshop", "study",       "playroom",   "lobby",
    "gallery", "chapel",   "stairwell", "corridor", "parlor",     "veranda",    "mudroom",
    "conservatory", "greenhouse", "spa", "bar",    "loft"};

constexpr std::uint64_t kPrototypeSeed = 0x9a7e5c1a55ULL;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

std::vector<double> class_prototype(int cls, int dim) {
  std::mt19937_64 rng(derive_seed(kPrototypeSeed, static_cast<std::uint64_t>(cls)));
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(dim));
  for (auto& x : p) x = n(rng);
  return p;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

// ---- vocabulary -----------------------------------------------------------

Vocabulary::Vocabulary() {
  words_ = {"<pad>", "<mask>"};
  for (const char* w : kWords) words_.emplace_back(w);
  first_class_ = static_cast<int>(words_.size());
  for (const char* w : kClassNames) words_.emplace_back(w);
}

int Vocabulary::id(const std::string& word) const {
  auto it = std::find(words_.begin(), words_.end(), word);
  if (it == words_.end()) throw VocabError("unknown word: " + word);
  return static_cast<int>(it - words_.begin());
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) throw VocabError("token id out of range: " + std::to_string(id));
  return words_[static_cast<std::size_t>(id)];
}

int Vocabulary::class_token(int semantic_class) const {
  if (semantic_class < 0 || semantic_class >= max_classes()) {
    throw VocabError("semantic class out of range");
  }
  return first_class_ + semantic_class;
}

const std::string& Vocabulary::class_name(int semantic_class) const {
  return word(class_token(semantic_class));
}

int Vocabulary::max_classes() { return static_cast<int>(kClassNames.size()); }

std::string Vocabulary::detokenize(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out += ' ';
    out += word(id);
  }
  return out;
}

const Vocabulary& vocabulary() {
  static const Vocabulary v;
  return v;
}

// ---- params ---------------------------------------------------------------

void WorldParams::validate() const {
  camera.validate();
  if (n_rooms < 2) throw GenerationError("n_rooms must be at least 2");
  if (nodes_per_room < 2 || nodes_per_room > 16) {
    throw GenerationError("nodes_per_room must lie in [2, 16]");
  }
  if (num_classes < 1 || num_classes > Vocabulary::max_classes()) {
    throw GenerationError("num_classes must lie in [1, " +
                          std::to_string(Vocabulary::max_classes()) + "]");
  }
  if (n_rooms > num_classes) {
    throw GenerationError("every room needs a distinct class: n_rooms > num_classes");
  }
  if (view_dim < 1) throw GenerationError("view_dim must be positive");
  if (views < 1) throw GenerationError("views must be positive");
  if (!(room_size >= 4.0)) throw GenerationError("room_size must be at least 4 m");
  if (!(camera_height > 0.0 && camera_height < ceiling_height)) {
    throw GenerationError("camera must sit between floor and ceiling");
  }
  if (!(door_width > 0.0 && door_width < room_size)) throw GenerationError("bad door width");
  if (!(door_height > 0.0 && door_height <= ceiling_height)) {
    throw GenerationError("bad door height");
  }
  if (!(node_jitter >= 0.0 && node_jitter < 0.25)) throw GenerationError("bad node jitter");
}

// ---- world ----------------------------------------------------------------

std::vector<SemanticBits> View::semantic_bits() const {
  std::vector<SemanticBits> bits(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    bits[i] = SemanticBits{1} << classes[i];
  }
  return bits;
}

void World::finalize() {
  adj_.assign(nodes.size(), {});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.value != i) throw FormatError("world node ids must be 0..N-1 in order");
  }
  for (const auto& e : edges) {
    if (!contains(e.a) || !contains(e.b)) throw FormatError("edge references unknown node");
    adj_[e.a.value].emplace_back(e.b.value, e.length);
    adj_[e.b.value].emplace_back(e.a.value, e.length);
  }
  for (auto& list : adj_) std::sort(list.begin(), list.end());
  grid_w_ = 0;
  grid_h_ = 0;
  for (const auto& r : rooms) {
    grid_w_ = std::max(grid_w_, r.gx + 1);
    grid_h_ = std::max(grid_h_, r.gy + 1);
  }
  grid_.assign(static_cast<std::size_t>(grid_w_), std::vector<int>(grid_h_, -1));
  for (const auto& r : rooms) grid_[r.gx][r.gy] = r.id;
}

bool World::contains(NodeId id) const { return id.value < nodes.size(); }

const WorldNode& World::node(NodeId id) const {
  if (!contains(id)) throw InvalidNodeError("unknown world node " + to_string(id));
  return nodes[id.value];
}

int World::room_at(double x, double y) const {
  const double s = params.room_size;
  const int gx = static_cast<int>(std::floor(x / s));
  const int gy = static_cast<int>(std::floor(y / s));
  if (gx < 0 || gy < 0 || gx >= grid_w_ || gy >= grid_h_) return -1;
  return grid_[gx][gy];
}

std::vector<NodeId> World::neighbors(NodeId id) const {
  node(id);
  std::vector<NodeId> out;
  for (const auto& [j, len] : adj_[id.value]) out.push_back(NodeId{static_cast<std::uint32_t>(j)});
  return out;
}

double World::edge_length(NodeId a, NodeId b) const {
  node(a);
  node(b);
  for (const auto& [j, len] : adj_[a.value]) {
    if (j == b.value) return len;
  }
  return -1.0;
}

bool World::has_door(int room_a, int room_b) const {
  for (const auto& d : doors) {
    if ((d.room_a == room_a && d.room_b == room_b) ||
        (d.room_a == room_b && d.room_b == room_a)) {
      return true;
    }
  }
  return false;
}

std::vector<double> World::distances_from(NodeId from) const {
  node(from);
  std::vector<double> dist(nodes.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from.value] = 0.0;
  pq.emplace(0.0, from.value);
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    for (const auto& [j, len] : adj_[i]) {
      if (d + len < dist[j]) {
        dist[j] = d + len;
        pq.emplace(dist[j], j);
      }
    }
  }
  return dist;
}

std::vector<NodeId> World::shortest_path(NodeId from, NodeId to) const {
  node(to);
  // Distances to the destination, then a forward walk that picks the
  // smallest id among neighbors lying on some shortest path.
  const std::vector<double> dist = distances_from(to);
  if (!std::isfinite(dist[from.value])) throw UnreachableError("no path in world graph");
  std::vector<NodeId> path{from};
  std::size_t cur = from.value;
  while (cur != to.value) {
    std::size_t next = cur;
    for (const auto& [j, len] : adj_[cur]) {
      const double slack = std::abs(dist[cur] - (len + dist[j]));
      if (slack <= 1e-9 * std::max(1.0, dist[cur])) {
        next = j;
        break;  // adj_ is sorted by id
      }
    }
    if (next == cur) throw UnreachableError("shortest path walk stalled");
    cur = next;
    path.push_back(NodeId{static_cast<std::uint32_t>(cur)});
  }
  return path;
}

double World::shortest_distance(NodeId from, NodeId to) const {
  node(to);
  return distances_from(from)[to.value];
}

double World::path_length(const std::vector<NodeId>& path) const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double len = edge_length(path[i - 1], path[i]);
    if (len < 0.0) throw InvalidNodeError("path steps between non-adjacent nodes");
    total += len;
  }
  return total;
}

RayHit World::cast_ray(const Vec3& o, const Vec3& d) const {
  const double s = params.room_size;
  const double max_range = params.camera.max_range;
  int cx = static_cast<int>(std::floor(o.x() / s));
  int cy = static_cast<int>(std::floor(o.y() / s));
  int room = room_at(o.x(), o.y());
  if (room < 0) return {0.0, -1};

  double t_vert = kInf;
  if (d.z() < 0.0) t_vert = -o.z() / d.z();
  if (d.z() > 0.0) t_vert = (params.ceiling_height - o.z()) / d.z();

  constexpr double kEps = 1e-12;
  for (int iter = 0; iter < 4 * (grid_w_ + grid_h_) + 4; ++iter) {
    double tx = kInf;
    double ty = kInf;
    if (d.x() > kEps) tx = ((cx + 1) * s - o.x()) / d.x();
    if (d.x() < -kEps) tx = (cx * s - o.x()) / d.x();
    if (d.y() > kEps) ty = ((cy + 1) * s - o.y()) / d.y();
    if (d.y() < -kEps) ty = (cy * s - o.y()) / d.y();
    const double t_wall = std::min(tx, ty);
    if (t_vert <= t_wall) return {std::min(t_vert, max_range), room};
    if (t_wall >= max_range) return {max_range, room};

    const Vec3 p = o + t_wall * d;
    int nx = cx;
    int ny = cy;
    double along = 0.0;
    double center = 0.0;
    if (tx < ty) {
      nx += d.x() > 0 ? 1 : -1;
      along = p.y();
      center = (cy + 0.5) * s;
    } else if (ty < tx) {
      ny += d.y() > 0 ? 1 : -1;
      along = p.x();
      center = (cx + 0.5) * s;
    } else {
      return {t_wall, room};  // exact corner hit
    }
    int next_room = -1;
    if (nx >= 0 && ny >= 0 && nx < grid_w_ && ny < grid_h_) next_room = grid_[nx][ny];
    const bool through = next_room >= 0 && has_door(room, next_room) &&
                         std::abs(along - center) <= 0.5 * params.door_width &&
                         p.z() >= 0.0 && p.z() <= params.door_height;
    if (!through) return {t_wall, room};
    cx = nx;
    cy = ny;
    room = next_room;
  }
  return {max_range, room};
}

Observation World::observe(NodeId id) const {
  const WorldNode& n = node(id);
  const auto& cam = params.camera;
  const int dim = params.view_dim;
  Observation obs;
  obs.node = id;
  obs.views.reserve(static_cast<std::size_t>(params.views));
  for (int k = 0; k < params.views; ++k) {
    View v;
    v.heading = view_heading(k, params.views);
    v.elevation = 0.0;
    v.pose = Pose::from_yaw(v.heading, n.position + Vec3(0.0, 0.0, params.camera_height));
    v.grid = FeatureGrid(cam.grid_h, cam.grid_w, dim);
    v.depth = DepthGrid(cam.grid_h, cam.grid_w);
    v.classes.assign(static_cast<std::size_t>(cam.grid_h) * cam.grid_w, 0);
    v.feature.assign(static_cast<std::size_t>(dim), 0.0);

    std::mt19937_64 rng(derive_seed(seed, id.value, static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int r = 0; r < cam.grid_h; ++r) {
      for (int c = 0; c < cam.grid_w; ++c) {
        const Vec3 dir = v.pose.rotation() * cam.ray(r, c);
        const RayHit hit = cast_ray(v.pose.translation(), dir);
        const Room& hit_room = rooms[static_cast<std::size_t>(hit.room)];
        v.depth.at(r, c) = hit.distance;
        v.classes[static_cast<std::size_t>(r) * cam.grid_w + c] = hit_room.semantic_class;
        auto f = v.grid.at(r, c);
        for (int j = 0; j < dim; ++j) {
          f[j] = hit_room.signature[j] + params.feature_noise * noise(rng);
          v.feature[j] += f[j];
        }
      }
    }
    const double cells = static_cast<double>(cam.grid_h) * cam.grid_w;
    for (auto& x : v.feature) x /= cells;
    obs.views.push_back(std::move(v));
  }
  return obs;
}

// ---- generation -----------------------------------------------------------

World generate_world(std::uint64_t seed, const WorldParams& params) {
  params.validate();
  World w;
  w.seed = seed;
  w.params = params;
  std::mt19937_64 rng(derive_seed(seed, "world"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  // Rooms: a random connected polyomino of grid cells.
  std::vector<std::pair<int, int>> cells{{0, 0}};
  const std::array<std::pair<int, int>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (static_cast<int>(cells.size()) < params.n_rooms) {
    const auto [bx, by] = cells[pick(cells.size())];
    const auto [dx, dy] = dirs[pick(dirs.size())];
    const std::pair<int, int> c{bx + dx, by + dy};
    if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  }
  int min_x = 0;
  int min_y = 0;
  for (const auto& [x, y] : cells) {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
  }
  std::vector<int> classes(static_cast<std::size_t>(params.num_classes));
  std::iota(classes.begin(), classes.end(), 0);
  std::shuffle(classes.begin(), classes.end(), rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Room r;
    r.id = static_cast<int>(i);
    r.gx = cells[i].first - min_x;
    r.gy = cells[i].second - min_y;
    r.semantic_class = classes[i];
    r.signature = class_prototype(r.semantic_class, params.view_dim);
    for (auto& x : r.signature) x += params.signature_noise * gauss(rng);
    w.rooms.push_back(std::move(r));
  }

  // Doors: a random spanning tree over adjacent rooms plus extra openings.
  std::vector<std::pair<int, int>> adjacent;
  for (std::size_t i = 0; i < w.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < w.rooms.size(); ++j) {
      const int manhattan = std::abs(w.rooms[i].gx - w.rooms[j].gx) +
                            std::abs(w.rooms[i].gy - w.rooms[j].gy);
      if (manhattan == 1) adjacent.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  std::shuffle(adjacent.begin(), adjacent.end(), rng);
  UnionFind uf(params.n_rooms);
  std::vector<std::pair<int, int>> extra;
  for (const auto& [a, b] : adjacent) {
    if (uf.unite(a, b)) {
      w.doors.push_back({a, b});
    } else {
      extra.emplace_back(a, b);
    }
  }
  for (const auto& [a, b] : extra) {
    if (unit(rng) < 0.5) w.doors.push_back({a, b});
  }

  // Viewpoints on a jittered lattice inside each room.
  const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(params.nodes_per_room))));
  const double spacing = std::min(2.0, 3.0 / std::max(1, g - 1));
  std::uniform_real_distribution<double> jitter(-params.node_jitter, params.node_jitter);
  std::vector<std::vector<std::size_t>> room_nodes(w.rooms.size());
  std::vector<std::pair<int, int>> lattice_of;
  for (const auto& r : w.rooms) {
    const double cx = (r.gx + 0.5) * params.room_size;
    const double cy = (r.gy + 0.5) * params.room_size;
    for (int k = 0; k < params.nodes_per_room; ++k) {
      const int li = k / g;
      const int lj = k % g;
      WorldNode n;
      n.id = NodeId{static_cast<std::uint32_t>(w.nodes.size())};
      n.room = r.id;
      n.position = Vec3(cx + (li - 0.5 * (g - 1)) * spacing + jitter(rng),
                        cy + (lj - 0.5 * (g - 1)) * spacing + jitter(rng), 0.0);
      room_nodes[static_cast<std::size_t>(r.id)].push_back(w.nodes.size());
      lattice_of.emplace_back(li, lj);
      w.nodes.push_back(n);
    }
  }
  auto add_edge = [&](std::size_t a, std::size_t b) {
    const double len = (w.nodes[a].position - w.nodes[b].position).norm();
    w.edges.push_back({w.nodes[a].id, w.nodes[b].id, len});
  };
  for (const auto& members : room_nodes) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const auto [ai, aj] = lattice_of[members[x]];
        const auto [bi, bj] = lattice_of[members[y]];
        if (std::abs(ai - bi) + std::abs(aj - bj) == 1) add_edge(members[x], members[y]);
      }
    }
  }
  for (const auto& door : w.doors) {
    const Room& ra = w.rooms[static_cast<std::size_t>(door.room_a)];
    const Room& rb = w.rooms[static_cast<std::size_t>(door.room_b)];
    const Vec3 center(0.5 * (ra.gx + rb.gx + 1) * params.room_size,
                      0.5 * (ra.gy + rb.gy + 1) * params.room_size, 0.0);
    auto nearest = [&](int room) {
      std::size_t best = 0;
      double best_d = kInf;
      for (std::size_t idx : room_nodes[static_cast<std::size_t>(room)]) {
        const double dd = (w.nodes[idx].position - center).norm();
        if (dd < best_d) {
          best_d = dd;
          best = idx;
        }
      }
      return best;
    };
    add_edge(nearest(door.room_a), nearest(door.room_b));
  }

  w.finalize();
  for (const auto& n : w.nodes) {
    if (w.neighbors(n.id).size() > 6) throw GenerationError("node degree exceeds 6");
  }
  for (const auto& e : w.edges) {
    if (e.length < 0.5 || e.length > 5.0) throw GenerationError("edge length out of range");
  }
  return w;
}

// ---- episodes -------------------------------------------------------------

const char* episode_kind_name(EpisodeKind k) {
  return k == EpisodeKind::kGoal ? "goal" : "fidelity";
}

EpisodeKind parse_episode_kind(const std::string& s) {
  if (s == "goal") return EpisodeKind::kGoal;
  if (s == "fidelity") return EpisodeKind::kFidelity;
  throw FormatError("unknown episode kind: " + s);
}

double view_heading(int k, int views) { return 2.0 * std::numbers::pi * k / views; }

int view_index_towards(const Vec3& from, const Vec3& to, int views) {
  double bearing = std::atan2(to.y() - from.y(), to.x() - from.x());
  if (bearing < 0) bearing += 2.0 * std::numbers::pi;
  const int k = static_cast<int>(std::lround(bearing / (2.0 * std::numbers::pi / views)));
  return k % views;
}

namespace {

// Room-class sequence along the path with turn words at each room change.
std::vector<int> make_instruction(const World& world, const std::vector<NodeId>& path,
                                  double start_heading) {
  const Vocabulary& voc = vocabulary();
  struct Segment {
    int room;
    double entry_bearing;
  };
  std::vector<Segment> segs{{world.node(path[0]).room, start_heading}};
  for (std::size_t i = 1; i < path.size(); ++i) {
    const int r = world.node(path[i]).room;
    if (r == segs.back().room) continue;
    const Vec3 d = world.node(path[i]).position - world.node(path[i - 1]).position;
    segs.push_back({r, std::atan2(d.y(), d.x())});
  }
  auto cls = [&](int room) { return voc.class_token(world.room(room).semantic_class); };
  auto turn = [&](std::vector<int>& out, double prev, double now) {
    const double diff = wrap_angle(now - prev);
    if (diff > std::numbers::pi / 4) {
      out.push_back(voc.id("turn"));
      out.push_back(voc.id("left"));
    } else if (diff < -std::numbers::pi / 4) {
      out.push_back(voc.id("turn"));
      out.push_back(voc.id("right"));
    } else {
      out.push_back(voc.id("go"));
      out.push_back(voc.id("straight"));
    }
  };
  constexpr std::size_t kMaxMiddle = 4;
  std::vector<int> out{voc.id("exit"), voc.id("the"), cls(segs[0].room), voc.id("room")};
  if (segs.size() < 2) throw GenerationError("instruction path must change rooms");
  const std::size_t last = segs.size() - 1;
  for (std::size_t i = 1; i < last && i <= kMaxMiddle; ++i) {
    turn(out, segs[i - 1].entry_bearing, segs[i].entry_bearing);
    out.push_back(voc.id("through"));
    out.push_back(voc.id("the"));
    out.push_back(cls(segs[i].room));
    out.push_back(voc.id("room"));
  }
  turn(out, segs[last - 1].entry_bearing, segs[last].entry_bearing);
  for (const char* w : {"and", "enter", "the"}) out.push_back(voc.id(w));
  out.push_back(cls(segs[last].room));
  for (const char* w : {"room", "then", "stop"}) out.push_back(voc.id(w));
  return out;
}

}  // namespace

Episode generate_episode(const World& world, std::uint64_t seed, EpisodeKind kind) {
  if (world.rooms.size() < 2) throw GenerationError("episodes need at least 2 rooms");
  std::mt19937_64 rng(derive_seed(seed, "episode"));
  const std::size_t n = world.nodes.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  Episode ep;
  ep.id = seed;
  ep.kind = kind;
  bool found = false;
  for (int attempt = 0; attempt < 10000 && !found; ++attempt) {
    const WorldNode& s = world.nodes[pick(rng)];
    const WorldNode& t = world.nodes[pick(rng)];
    if (s.room == t.room) continue;
    if ((s.position - t.position).norm() <= ep.success_radius) continue;
    ep.start = s.id;
    ep.target = t.id;
    found = true;
  }
  if (!found) throw GenerationError("could not sample a start/target pair");
  ep.start_heading =
      view_heading(static_cast<int>(pick(rng) % static_cast<std::size_t>(world.params.views)),
                   world.params.views);

  std::vector<NodeId> waypoints{ep.start};
  if (kind == EpisodeKind::kFidelity) {
    const int detours = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int i = 0; i < detours; ++i) {
      NodeId w;
      do {
        w = world.nodes[pick(rng)].id;
      } while (w == ep.start || w == ep.target || w == waypoints.back());
      waypoints.push_back(w);
    }
  }
  waypoints.push_back(ep.target);
  ep.expert_path = {ep.start};
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    auto leg = world.shortest_path(waypoints[i - 1], waypoints[i]);
    ep.expert_path.insert(ep.expert_path.end(), leg.begin() + 1, leg.end());
  }
  ep.instruction = make_instruction(world, ep.expert_path, ep.start_heading);
  return ep;
}

}  // namespace hnav
