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

#include "hnav/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unistd.h>

namespace hnav::io {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

class Writer {
 public:
  Writer(const char magic[4]) { out_.append(magic, 4); u32(kFormatVersion); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const char magic[4]) : b_(bytes) {
    if (b_.size() < 8 || std::memcmp(b_.data(), magic, 4) != 0) {
      throw FormatError(std::string("bad magic, expected ") + std::string(magic, 4));
    }
    pos_ = 4;
    const std::uint32_t version = u32();
    if (version != kFormatVersion) {
      throw FormatError("unsupported format version " + std::to_string(version));
    }
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(b_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_++])) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void finish() const {
    if (pos_ != b_.size()) throw FormatError("trailing bytes in container");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw FormatError("truncated container");
  }
  const std::string& b_;
  std::size_t pos_ = 0;
};

constexpr char kCloudMagic[4] = {'H', 'N', 'P', 'C'};
constexpr char kMapMagic[4] = {'H', 'N', 'M', 'M'};
constexpr char kCkptMagic[4] = {'H', 'N', 'C', 'K'};

}  // namespace

// ---- point clouds ---------------------------------------------------------

std::string encode_pointcloud(const PointCloud& pc) {
  Writer w(kCloudMagic);
  w.u32(static_cast<std::uint32_t>(pc.feature_dim()));
  w.u64(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (int a = 0; a < 3; ++a) w.f64(pc.position(i)[a]);
    for (double f : pc.feature(i)) w.f64(f);
    w.u64(pc.semantics(i));
  }
  return w.bytes();
}

PointCloud decode_pointcloud(const std::string& bytes) {
  Reader r(bytes, kCloudMagic);
  const int dim = static_cast<int>(r.u32());
  const std::uint64_t n = r.u64();
  PointCloud pc(dim);
  std::vector<double> feat(static_cast<std::size_t>(dim));
  for (std::uint64_t i = 0; i < n; ++i) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = r.f64();
    for (auto& f : feat) f = r.f64();
    pc.add(p, feat, r.u64());
  }
  r.finish();
  return pc;
}

void save_pointcloud(const fs::path& path, const PointCloud& pc) {
  write_atomic(path, encode_pointcloud(pc));
}

PointCloud load_pointcloud(const fs::path& path) { return decode_pointcloud(read_file(path)); }

// ---- metric maps ----------------------------------------------------------

std::string encode_metric_map(const MetricMap& m) {
  Writer w(kMapMagic);
  w.i32(m.spec.u);
  w.i32(m.spec.v);
  w.f64(m.spec.cell_size);
  w.f64(m.spec.z_min);
  w.f64(m.spec.z_max);
  w.u32(static_cast<std::uint32_t>(m.feature_dim));
  for (double f : m.features) w.f64(f);
  for (std::size_t c = 0; c < m.spec.cells(); ++c) {
    w.i32(m.counts[c]);
    w.u8(m.observed[c]);
    w.u64(m.semantics[c]);
    w.u8(m.navigable[c]);
    w.u8(m.masked[c]);
    w.u32(static_cast<std::uint32_t>(m.cell_nodes[c].size()));
    for (NodeId id : m.cell_nodes[c]) w.u32(id.value);
  }
  return w.bytes();
}

MetricMap decode_metric_map(const std::string& bytes) {
  Reader r(bytes, kMapMagic);
  MapSpec spec;
  spec.u = r.i32();
  spec.v = r.i32();
  spec.cell_size = r.f64();
  spec.z_min = r.f64();
  spec.z_max = r.f64();
  spec.validate();
  const int dim = static_cast<int>(r.u32());
  MetricMap m(spec, dim);
  for (auto& f : m.features) f = r.f64();
  for (std::size_t c = 0; c < spec.cells(); ++c) {
    m.counts[c] = r.i32();
    m.observed[c] = r.u8();
    m.semantics[c] = r.u64();
    m.navigable[c] = r.u8();
    m.masked[c] = r.u8();
    const std::uint32_t k = r.u32();
    for (std::uint32_t i = 0; i < k; ++i) m.cell_nodes[c].push_back(NodeId{r.u32()});
  }
  r.finish();
  return m;
}

void save_metric_map(const fs::path& path, const MetricMap& map) {
  write_atomic(path, encode_metric_map(map));
}

MetricMap load_metric_map(const fs::path& path) { return decode_metric_map(read_file(path)); }

// ---- checkpoints ----------------------------------------------------------

std::map<std::string, double> encoder_config_meta(const EncoderConfig& c) {
  return {{"dim", c.dim},
          {"heads", c.heads},
          {"text_layers", c.text_layers},
          {"pano_layers", c.pano_layers},
          {"long_layers", c.long_layers},
          {"short_layers", c.short_layers},
          {"vocab_size", c.vocab_size},
          {"max_len", c.max_len},
          {"ffn_mult", c.ffn_mult},
          {"view_dim", c.view_dim},
          {"num_classes", c.num_classes},
          {"max_step", c.max_step},
          {"dropout", c.dropout},
          {"init_std", c.init_std}};
}

EncoderConfig encoder_config_from_meta(const std::map<std::string, double>& meta) {
  EncoderConfig c;
  auto get = [&](const char* key, auto& field) {
    auto it = meta.find(key);
    if (it == meta.end()) throw FormatError(std::string("checkpoint lacks config key ") + key);
    field = static_cast<std::remove_reference_t<decltype(field)>>(it->second);
  };
  get("dim", c.dim);
  get("heads", c.heads);
  get("text_layers", c.text_layers);
  get("pano_layers", c.pano_layers);
  get("long_layers", c.long_layers);
  get("short_layers", c.short_layers);
  get("vocab_size", c.vocab_size);
  get("max_len", c.max_len);
  get("ffn_mult", c.ffn_mult);
  get("view_dim", c.view_dim);
  get("num_classes", c.num_classes);
  get("max_step", c.max_step);
  get("dropout", c.dropout);
  get("init_std", c.init_std);
  c.validate();
  return c;
}

void save_checkpoint(const fs::path& path, const Encoders& enc,
                     const std::map<std::string, double>& extra_meta) {
  Writer w(kCkptMagic);
  auto meta = encoder_config_meta(enc.config());
  for (const auto& [k, v] : extra_meta) meta[k] = v;
  w.u32(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    w.str(k);
    w.f64(v);
  }
  const auto& entries = enc.params().entries();
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, var] : entries) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(var.rows()));
    w.u32(static_cast<std::uint32_t>(var.cols()));
    for (double x : var.value().data) w.f64(x);
  }
  write_atomic(path, w.bytes());
}

namespace {

template <typename OnTensor>
CheckpointInfo parse_checkpoint(const std::string& bytes, OnTensor&& on_tensor) {
  Reader r(bytes, kCkptMagic);
  CheckpointInfo info;
  const std::uint32_t nmeta = r.u32();
  for (std::uint32_t i = 0; i < nmeta; ++i) {
    std::string k = r.str();
    info.meta[k] = r.f64();
  }
  const std::uint32_t nt = r.u32();
  for (std::uint32_t i = 0; i < nt; ++i) {
    CheckpointInfo::Tensor t;
    t.name = r.str();
    t.rows = static_cast<int>(r.u32());
    t.cols = static_cast<int>(r.u32());
    std::vector<double> data(static_cast<std::size_t>(t.rows) * t.cols);
    for (auto& x : data) x = r.f64();
    on_tensor(t, std::move(data));
    info.tensors.push_back(std::move(t));
  }
  r.finish();
  return info;
}

}  // namespace

CheckpointInfo read_checkpoint_info(const fs::path& path) {
  return parse_checkpoint(read_file(path), [](const auto&, auto&&) {});
}

void load_checkpoint(const fs::path& path, Encoders& enc) {
  const std::string bytes = read_file(path);
  std::size_t loaded = 0;
  const CheckpointInfo info =
      parse_checkpoint(bytes, [&](const CheckpointInfo::Tensor& t, std::vector<double> data) {
        nn::Var v = enc.params().find(t.name);
        if (!v) throw FormatError("checkpoint tensor " + t.name + " unknown to this model");
        if (v.rows() != t.rows || v.cols() != t.cols) {
          throw FormatError("checkpoint tensor " + t.name + " has shape " +
                            std::to_string(t.rows) + "x" + std::to_string(t.cols) +
                            ", model expects " + std::to_string(v.rows()) + "x" +
                            std::to_string(v.cols()));
        }
        v.mutable_value().data = std::move(data);
        ++loaded;
      });
  const EncoderConfig stored = encoder_config_from_meta(info.meta);
  if (encoder_config_meta(stored) != encoder_config_meta(enc.config())) {
    throw FormatError("checkpoint encoder config differs from the model's");
  }
  if (loaded != enc.params().entries().size()) {
    throw FormatError("checkpoint is missing parameters");
  }
}

// ---- JSON -----------------------------------------------------------------

namespace {

Json vec3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field ") + key + ": " + e.what());
  }
}

void check_header(const Json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw FormatError(std::string("not a ") + format + " document");
  }
  if (j.value("version", 0U) != kFormatVersion) throw FormatError("unsupported document version");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

Json world_to_json(const World& w) {
  const WorldParams& p = w.params;
  Json j;
  j["format"] = "hnav-world";
  j["version"] = kFormatVersion;
  j["seed"] = w.seed;
  j["params"] = {{"n_rooms", p.n_rooms},
                 {"nodes_per_room", p.nodes_per_room},
                 {"view_dim", p.view_dim},
                 {"num_classes", p.num_classes},
                 {"views", p.views},
                 {"room_size", p.room_size},
                 {"camera_height", p.camera_height},
                 {"ceiling_height", p.ceiling_height},
                 {"door_width", p.door_width},
                 {"door_height", p.door_height},
                 {"feature_noise", p.feature_noise},
                 {"signature_noise", p.signature_noise},
                 {"node_jitter", p.node_jitter},
                 {"camera",
                  {{"grid_h", p.camera.grid_h},
                   {"grid_w", p.camera.grid_w},
                   {"hfov", p.camera.hfov},
                   {"vfov", p.camera.vfov},
                   {"max_range", p.camera.max_range}}}};
  Json rooms = Json::array();
  for (const auto& r : w.rooms) {
    const double s = p.room_size;
    rooms.push_back({{"id", r.id},
                     {"gx", r.gx},
                     {"gy", r.gy},
                     {"class", r.semantic_class},
                     {"class_name", vocabulary().class_name(r.semantic_class)},
                     {"extent", {r.x0(s), r.y0(s), r.x0(s) + s, r.y0(s) + s}},
                     {"signature", r.signature}});
  }
  j["rooms"] = rooms;
  Json doors = Json::array();
  for (const auto& d : w.doors) doors.push_back({d.room_a, d.room_b});
  j["doors"] = doors;
  Json nodes = Json::array();
  for (const auto& n : w.nodes) {
    nodes.push_back({{"id", n.id.value}, {"position", vec3(n.position)}, {"room", n.room}});
  }
  j["nodes"] = nodes;
  Json edges = Json::array();
  for (const auto& e : w.edges) {
    edges.push_back({{"a", e.a.value}, {"b", e.b.value}, {"length", e.length}});
  }
  j["edges"] = edges;
  Json vocab = Json::array();
  for (int i = 0; i < vocabulary().size(); ++i) vocab.push_back(vocabulary().word(i));
  j["vocab"] = vocab;
  return j;
}

World world_from_json(const Json& j) {
  check_header(j, "hnav-world");
  World w;
  w.seed = field<std::uint64_t>(j, "seed");
  const Json& p = j.at("params");
  WorldParams& wp = w.params;
  wp.n_rooms = field<int>(p, "n_rooms");
  wp.nodes_per_room = field<int>(p, "nodes_per_room");
  wp.view_dim = field<int>(p, "view_dim");
  wp.num_classes = field<int>(p, "num_classes");
  wp.views = field<int>(p, "views");
  wp.room_size = field<double>(p, "room_size");
  wp.camera_height = field<double>(p, "camera_height");
  wp.ceiling_height = field<double>(p, "ceiling_height");
  wp.door_width = field<double>(p, "door_width");
  wp.door_height = field<double>(p, "door_height");
  wp.feature_noise = field<double>(p, "feature_noise");
  wp.signature_noise = field<double>(p, "signature_noise");
  wp.node_jitter = field<double>(p, "node_jitter");
  const Json& cam = p.at("camera");
  wp.camera.grid_h = field<int>(cam, "grid_h");
  wp.camera.grid_w = field<int>(cam, "grid_w");
  wp.camera.hfov = field<double>(cam, "hfov");
  wp.camera.vfov = field<double>(cam, "vfov");
  wp.camera.max_range = field<double>(cam, "max_range");
  wp.validate();
  if (j.contains("vocab")) {
    const Json& v = j.at("vocab");
    if (!v.is_array() || static_cast<int>(v.size()) != vocabulary().size()) {
      throw VocabError("world vocabulary does not match this build");
    }
    for (int i = 0; i < vocabulary().size(); ++i) {
      if (v[static_cast<std::size_t>(i)] != vocabulary().word(i)) {
        throw VocabError("world vocabulary does not match this build");
      }
    }
  }
  for (const auto& r : j.at("rooms")) {
    Room room;
    room.id = field<int>(r, "id");
    room.gx = field<int>(r, "gx");
    room.gy = field<int>(r, "gy");
    room.semantic_class = field<int>(r, "class");
    room.signature = field<std::vector<double>>(r, "signature");
    if (room.id != static_cast<int>(w.rooms.size())) throw FormatError("room ids out of order");
    if (room.semantic_class < 0 || room.semantic_class >= wp.num_classes) {
      throw FormatError("room class out of range");
    }
    if (static_cast<int>(room.signature.size()) != wp.view_dim) {
      throw FormatError("room signature width mismatch");
    }
    w.rooms.push_back(std::move(room));
  }
  for (const auto& d : j.at("doors")) {
    const int a = d.at(0).get<int>();
    const int b = d.at(1).get<int>();
    if (a < 0 || b < 0 || a >= static_cast<int>(w.rooms.size()) ||
        b >= static_cast<int>(w.rooms.size())) {
      throw FormatError("door references unknown room");
    }
    w.doors.push_back({a, b});
  }
  for (const auto& n : j.at("nodes")) {
    WorldNode node;
    node.id = NodeId{field<std::uint32_t>(n, "id")};
    node.position = vec3_from(n.at("position"));
    node.room = field<int>(n, "room");
    if (node.room < 0 || node.room >= static_cast<int>(w.rooms.size())) {
      throw FormatError("node references unknown room");
    }
    w.nodes.push_back(node);
  }
  for (const auto& e : j.at("edges")) {
    w.edges.push_back({NodeId{field<std::uint32_t>(e, "a")}, NodeId{field<std::uint32_t>(e, "b")},
                       field<double>(e, "length")});
  }
  w.finalize();
  return w;
}

void save_world(const fs::path& path, const World& w) {
  write_atomic(path, world_to_json(w).dump(1) + "\n");
}

World load_world(const fs::path& path) { return world_from_json(parse_json(read_file(path))); }

Json episode_to_json(const Episode& e) {
  Json path = Json::array();
  for (NodeId id : e.expert_path) path.push_back(id.value);
  return {{"id", e.id},
          {"world_index", e.world_index},
          {"kind", episode_kind_name(e.kind)},
          {"start", e.start.value},
          {"target", e.target.value},
          {"start_heading", e.start_heading},
          {"success_radius", e.success_radius},
          {"expert_path", path},
          {"instruction", e.instruction},
          {"text", vocabulary().detokenize(e.instruction)}};
}

Episode episode_from_json(const Json& j) {
  Episode e;
  e.id = field<std::uint64_t>(j, "id");
  e.world_index = field<int>(j, "world_index");
  e.kind = parse_episode_kind(field<std::string>(j, "kind"));
  e.start = NodeId{field<std::uint32_t>(j, "start")};
  e.target = NodeId{field<std::uint32_t>(j, "target")};
  e.start_heading = field<double>(j, "start_heading");
  e.success_radius = field<double>(j, "success_radius");
  for (auto v : field<std::vector<std::uint32_t>>(j, "expert_path")) e.expert_path.push_back(NodeId{v});
  e.instruction = field<std::vector<int>>(j, "instruction");
  for (int t : e.instruction) vocabulary().word(t);
  if (e.expert_path.empty() || e.expert_path.front() != e.start || e.expert_path.back() != e.target) {
    throw FormatError("expert path must run from start to target");
  }
  return e;
}

void save_episodes(const fs::path& path, const std::vector<Episode>& eps,
                   const std::vector<std::string>& world_files) {
  Json j;
  j["format"] = "hnav-episodes";
  j["version"] = kFormatVersion;
  j["worlds"] = world_files;
  Json arr = Json::array();
  for (const auto& e : eps) arr.push_back(episode_to_json(e));
  j["episodes"] = arr;
  write_atomic(path, j.dump(1) + "\n");
}

EpisodeFile load_episodes(const fs::path& path) {
  const Json j = parse_json(read_file(path));
  check_header(j, "hnav-episodes");
  EpisodeFile f;
  f.world_files = field<std::vector<std::string>>(j, "worlds");
  for (const auto& e : j.at("episodes")) {
    f.episodes.push_back(episode_from_json(e));
    const int wi = f.episodes.back().world_index;
    if (wi < 0 || wi >= static_cast<int>(f.world_files.size())) {
      throw FormatError("episode references unknown world " + std::to_string(wi));
    }
  }
  return f;
}

std::vector<World> load_episode_worlds(const fs::path& episode_path, const EpisodeFile& file) {
  std::vector<World> worlds;
  for (const auto& name : file.world_files) {
    fs::path p = name;
    if (p.is_relative()) p = episode_path.parent_path() / p;
    worlds.push_back(load_world(p));
  }
  for (const auto& e : file.episodes) {
    const World& w = worlds[static_cast<std::size_t>(e.world_index)];
    for (NodeId id : e.expert_path) {
      if (!w.contains(id)) throw FormatError("episode path leaves its world");
    }
  }
  return worlds;
}

Json topo_to_json(const TopoMap& topo) {
  Json j;
  j["format"] = "hnav-topo";
  j["version"] = kFormatVersion;
  if (topo.has_current()) j["current"] = topo.current().value;
  Json nodes = Json::array();
  for (const auto& n : topo.nodes()) {
    if (n.id == kStopNode) continue;
    nodes.push_back({{"id", n.id.value},
                     {"kind", node_kind_name(n.kind)},
                     {"position", vec3(n.position)},
                     {"last_visit_step", n.last_visit_step},
                     {"obs_count", n.obs_count},
                     {"cached_points", n.cache ? n.cache->cloud.size() : 0}});
  }
  j["nodes"] = nodes;
  Json edges = Json::array();
  for (const auto& e : topo.edges()) {
    edges.push_back({{"a", e.a.value}, {"b", e.b.value}, {"distance", e.distance}});
  }
  j["edges"] = edges;
  return j;
}

namespace {

Json node_json(NodeId id) { return id == kStopNode ? Json("stop") : Json(id.value); }

}  // namespace

Json step_log_to_json(const StepLog& log) {
  Json top = Json::array();
  for (const auto& [id, s] : log.top) top.push_back({{"node", node_json(id)}, {"score", s}});
  Json moves = Json::array();
  for (NodeId id : log.moves) moves.push_back(id.value);
  Json j = {{"step", log.step},
            {"chosen", node_json(log.chosen)},
            {"delta", log.delta},
            {"top", top},
            {"moves", moves}};
  if (log.label) j["label"] = node_json(*log.label);
  return j;
}

Json metric_record_to_json(const MetricRecord& r) {
  return {{"episode", r.episode_id}, {"tl", r.tl},     {"ne", r.ne},     {"sr", r.sr},
          {"osr", r.osr},            {"spl", r.spl},   {"ndtw", r.ndtw}, {"sdtw", r.sdtw}};
}

Json summary_to_json(const MetricSummary& s) {
  return {{"episodes", s.episodes}, {"tl", s.tl},     {"ne", s.ne},     {"sr", s.sr},
          {"osr", s.osr},           {"spl", s.spl},   {"ndtw", s.ndtw}, {"sdtw", s.sdtw}};
}

std::string summary_csv(const MetricSummary& s) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "episodes,tl,ne,sr,osr,spl,ndtw,sdtw\n";
  os << s.episodes << ',' << s.tl << ',' << s.ne << ',' << s.sr << ',' << s.osr << ',' << s.spl
     << ',' << s.ndtw << ',' << s.sdtw << '\n';
  return os.str();
}

// ---- map exports ----------------------------------------------------------

std::string mask_pgm(const MetricMap& map, const std::vector<std::uint8_t>& mask) {
  // Rows run from far (+x) to near so "forward" is up in the image; columns
  // run from left (+y) to right.
  const MapSpec& s = map.spec;
  std::ostringstream os;
  os << "P2\n" << s.v << ' ' << s.u << "\n255\n";
  for (int u = s.u - 1; u >= 0; --u) {
    for (int v = s.v - 1; v >= 0; --v) {
      os << (mask[s.index(u, v)] ? 255 : 0) << (v == 0 ? '\n' : ' ');
    }
  }
  return os.str();
}

std::vector<fs::path> export_map(const MetricMap& map, const fs::path& prefix) {
  const MapSpec& s = map.spec;
  std::vector<fs::path> written;
  auto emit = [&](const std::string& suffix, const std::string& body) {
    fs::path p = prefix;
    p += suffix;
    write_atomic(p, body);
    written.push_back(p);
  };
  auto grid_csv = [&](auto value_at) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (int u = s.u - 1; u >= 0; --u) {
      for (int v = s.v - 1; v >= 0; --v) os << value_at(u, v) << (v == 0 ? '\n' : ',');
    }
    return os.str();
  };
  for (int c = 0; c < map.feature_dim; ++c) {
    emit("_feat" + std::to_string(c) + ".csv",
         grid_csv([&](int u, int v) { return map.features[s.index(u, v) * map.feature_dim + c]; }));
  }
  emit("_counts.csv", grid_csv([&](int u, int v) { return map.counts[s.index(u, v)]; }));
  emit("_semantics.csv", grid_csv([&](int u, int v) { return map.semantics[s.index(u, v)]; }));
  emit("_observed.pgm", mask_pgm(map, map.observed));
  emit("_navigable.pgm", mask_pgm(map, map.navigable));
  return written;
}

}  // namespace hnav::io
