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

// File formats: little-endian binary containers (point clouds, metric maps,
// checkpoints), JSON documents (worlds, episodes, topological maps, logs),
// and CSV/PGM map exports. Every write goes to a temporary file that is
// renamed into place.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hnav/agent.hpp"
#include "hnav/encoders.hpp"
#include "hnav/env.hpp"
#include "hnav/geometry.hpp"
#include "hnav/metrics.hpp"
#include "hnav/topo_map.hpp"

namespace hnav::io {

using Json = nlohmann::ordered_json;

inline constexpr std::uint32_t kFormatVersion = 1;

void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);  // throws FormatError

// ---- binary containers ----------------------------------------------------

std::string encode_pointcloud(const PointCloud& pc);
PointCloud decode_pointcloud(const std::string& bytes);
void save_pointcloud(const std::filesystem::path& path, const PointCloud& pc);
PointCloud load_pointcloud(const std::filesystem::path& path);

std::string encode_metric_map(const MetricMap& map);
MetricMap decode_metric_map(const std::string& bytes);
void save_metric_map(const std::filesystem::path& path, const MetricMap& map);
MetricMap load_metric_map(const std::filesystem::path& path);

struct CheckpointInfo {
  std::map<std::string, double> meta;  // encoder config and run metadata
  struct Tensor {
    std::string name;
    int rows = 0;
    int cols = 0;
  };
  std::vector<Tensor> tensors;
};

std::map<std::string, double> encoder_config_meta(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_meta(const std::map<std::string, double>& meta);

void save_checkpoint(const std::filesystem::path& path, const Encoders& enc,
                     const std::map<std::string, double>& extra_meta = {});
/// Header and tensor directory without loading the values.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);
/// Copies stored tensors into `enc`. Names and shapes must match exactly.
void load_checkpoint(const std::filesystem::path& path, Encoders& enc);

// ---- JSON documents -------------------------------------------------------

Json world_to_json(const World& w);
World world_from_json(const Json& j);
void save_world(const std::filesystem::path& path, const World& w);
World load_world(const std::filesystem::path& path);

Json episode_to_json(const Episode& e);
Episode episode_from_json(const Json& j);
void save_episodes(const std::filesystem::path& path, const std::vector<Episode>& eps,
                   const std::vector<std::string>& world_files);
/// Episodes index into `world_files` via Episode::world_index; relative
/// world paths resolve against the episode file's directory.
struct EpisodeFile {
  std::vector<std::string> world_files;
  std::vector<Episode> episodes;
};
EpisodeFile load_episodes(const std::filesystem::path& path);
std::vector<World> load_episode_worlds(const std::filesystem::path& episode_path,
                                       const EpisodeFile& file);

Json topo_to_json(const TopoMap& topo);
Json step_log_to_json(const StepLog& log);
Json metric_record_to_json(const MetricRecord& r);
Json summary_to_json(const MetricSummary& s);
std::string summary_csv(const MetricSummary& s);

// ---- map exports ----------------------------------------------------------

/// Writes <prefix>_feat<c>.csv per channel, <prefix>_counts.csv,
/// <prefix>_semantics.csv, <prefix>_observed.pgm and <prefix>_navigable.pgm.
/// Returns the files written.
std::vector<std::filesystem::path> export_map(const MetricMap& map,
                                              const std::filesystem::path& prefix);
std::string mask_pgm(const MetricMap& map, const std::vector<std::uint8_t>& mask);

}  // namespace hnav::io
