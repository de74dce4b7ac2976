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

// Command line entry point: world and episode generation, pre-training,
// fine-tuning, evaluation, map export and file inspection.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hnav/experiment.hpp"
#include "hnav/io.hpp"

namespace fs = std::filesystem;
using namespace hnav;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Global {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

struct WorldOpts {
  int rooms = 4;
  int nodes_per_room = 4;
  int classes = 8;
  int view_dim = 32;
  int views = 12;

  WorldParams params() const {
    WorldParams p;
    p.n_rooms = rooms;
    p.nodes_per_room = nodes_per_room;
    p.num_classes = classes;
    p.view_dim = view_dim;
    p.views = views;
    p.validate();
    return p;
  }

  void add(CLI::App* app) {
    app->add_option("--rooms", rooms, "Rooms per world")->capture_default_str();
    app->add_option("--nodes-per-room", nodes_per_room, "Viewpoints per room")->capture_default_str();
    app->add_option("--classes", classes, "Semantic room classes")->capture_default_str();
    app->add_option("--view-dim", view_dim, "Synthetic view feature width")->capture_default_str();
    app->add_option("--views", views, "Panorama headings")->capture_default_str();
  }
};

struct ModelOpts {
  int dim = 64;
  int heads = 4;
  int layers = 2;
  int map_size = 21;
  double cell_size = 0.5;
  int kappa = 1;
  int max_steps = 15;

  void add(CLI::App* app) {
    app->add_option("--dim", dim, "Hidden width of a fresh model")->capture_default_str();
    app->add_option("--heads", heads, "Attention heads of a fresh model")->capture_default_str();
    app->add_option("--layers", layers, "Layers per encoder of a fresh model")->capture_default_str();
    app->add_option("--map-size", map_size, "Metric map cells per side (odd)")->capture_default_str();
    app->add_option("--cell-size", cell_size, "Metric map cell size in meters")->capture_default_str();
    app->add_option("--kappa", kappa, "Hop radius of the map update")->capture_default_str();
    app->add_option("--max-steps", max_steps, "Decision limit per rollout")->capture_default_str();
  }

  EncoderConfig encoder(int view_dim, int num_classes) const {
    EncoderConfig c;
    c.dim = dim;
    c.heads = heads;
    c.text_layers = c.pano_layers = c.long_layers = c.short_layers = layers;
    c.vocab_size = vocabulary().size();
    c.view_dim = view_dim;
    c.num_classes = num_classes;
    c.validate();
    return c;
  }

  MapConfig map() const {
    MapConfig m;
    m.spec.u = m.spec.v = map_size;
    m.spec.cell_size = cell_size;
    m.spec.validate();
    m.kappa = kappa;
    return m;
  }

  std::map<std::string, double> meta() const {
    return {{"map_size", map_size}, {"cell_size", cell_size}, {"kappa", kappa},
            {"max_steps", max_steps}};
  }

  // Map settings stored with a checkpoint apply unless given on the command
  // line or in the config file.
  void adopt(const std::map<std::string, double>& meta, const CLI::App* app) {
    auto take = [&](const char* key, const char* flag, auto& field) {
      auto it = meta.find(key);
      if (it != meta.end() && app->count(flag) == 0) {
        field = static_cast<std::remove_reference_t<decltype(field)>>(it->second);
      }
    };
    take("map_size", "--map-size", map_size);
    take("cell_size", "--cell-size", cell_size);
    take("kappa", "--kappa", kappa);
    take("max_steps", "--max-steps", max_steps);
  }
};

fs::path require_out(const Global& g, const char* what) {
  if (g.out.empty()) throw CLI::ValidationError("--out", std::string("needs a path for the ") + what);
  return g.out;
}

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p += suffix;
  return p;
}

struct EpisodeSet {
  io::EpisodeFile file;
  std::vector<World> worlds;
};

EpisodeSet load_set(const fs::path& path) {
  EpisodeSet s;
  s.file = io::load_episodes(path);
  s.worlds = io::load_episode_worlds(path, s.file);
  return s;
}

std::vector<PretrainSample> samples_of(const EpisodeSet& s) {
  std::vector<PretrainSample> out;
  for (const auto& e : s.file.episodes) {
    out.push_back({&s.worlds[static_cast<std::size_t>(e.world_index)], &e});
  }
  return out;
}

std::unique_ptr<Encoders> open_model(const std::string& init, const Global& g, ModelOpts& mo,
                                     const EpisodeSet& data, const CLI::App* app) {
  const WorldParams& wp = data.worlds.front().params;
  if (init.empty()) {
    return std::make_unique<Encoders>(mo.encoder(wp.view_dim, wp.num_classes),
                                      derive_seed(g.seed, "init"));
  }
  const io::CheckpointInfo info = io::read_checkpoint_info(init);
  auto enc = std::make_unique<Encoders>(io::encoder_config_from_meta(info.meta), 0);
  io::load_checkpoint(init, *enc);
  mo.adopt(info.meta, app);
  if (enc->config().view_dim != wp.view_dim || enc->config().num_classes < wp.num_classes) {
    throw FormatError("checkpoint does not match the episode worlds");
  }
  return enc;
}

// ---- subcommands ------------------------------------------------------------

int cmd_gen_world(const Global& g, const WorldOpts& wo) {
  const fs::path out = require_out(g, "world file");
  const World w = generate_world(derive_seed(g.seed, "world"), wo.params());
  io::save_world(out, w);
  std::cout << "world " << out.string() << ": " << w.rooms.size() << " rooms, " << w.nodes.size()
            << " nodes, " << w.edges.size() << " edges\n";
  return 0;
}

int cmd_gen_episodes(const Global& g, const WorldOpts& wo, const std::vector<std::string>& world_paths,
                     int n_worlds, int count, const std::string& kind) {
  const fs::path out = require_out(g, "episode file");
  std::vector<World> worlds;
  std::vector<std::string> names;
  if (!world_paths.empty()) {
    for (const auto& p : world_paths) {
      worlds.push_back(io::load_world(p));
      names.push_back(fs::absolute(p).lexically_relative(fs::absolute(out).parent_path()).string());
    }
  } else {
    worlds = generate_worlds(g.seed, n_worlds, wo.params());
    for (std::size_t i = 0; i < worlds.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "_world%03zu.json", i);
      const fs::path wp = with_suffix(out.parent_path() / out.stem(), buf);
      io::save_world(wp, worlds[i]);
      names.push_back(wp.filename().string());
    }
  }
  const bool mixed = kind == "mixed";
  const EpisodeKind k = mixed ? EpisodeKind::kGoal : parse_episode_kind(kind);
  const auto eps = generate_episodes(worlds, g.seed, count, k, mixed);
  io::save_episodes(out, eps, names);
  std::cout << "episodes " << out.string() << ": " << eps.size() << " over " << worlds.size()
            << " worlds\n";
  return 0;
}

struct TrainOpts {
  std::string episodes;
  std::string init;
  int steps = 1000;
  int batch = 1;
  double lr = 1e-3;
  int warmup = 100;
  double weight_decay = 0.01;
  double clip = 1.0;
  int save_every = 0;

  void add(CLI::App* app) {
    app->add_option("--episodes", episodes, "Episode file")->required();
    app->add_option("--init", init, "Checkpoint to start from");
    app->add_option("--steps", steps, "Optimizer updates")->capture_default_str();
    app->add_option("--batch", batch, "Episodes per minibatch")->capture_default_str();
    app->add_option("--lr", lr, "Peak learning rate")->capture_default_str();
    app->add_option("--warmup", warmup, "Warmup updates")->capture_default_str();
    app->add_option("--weight-decay", weight_decay, "Decoupled weight decay")->capture_default_str();
    app->add_option("--clip", clip, "Global gradient norm clip (0 disables)")->capture_default_str();
    app->add_option("--save-every", save_every, "Checkpoint interval in updates (0: end only)")
        ->capture_default_str();
  }

  OptimConfig optim() const {
    OptimConfig o;
    o.lr = lr;
    o.warmup_steps = warmup;
    o.total_steps = steps;
    o.weight_decay = weight_decay;
    o.clip_norm = clip;
    return o;
  }
};

int cmd_pretrain(const Global& g, ModelOpts& mo, const TrainOpts& to, double token_mask,
                 double cell_mask, const std::vector<double>& weights, const CLI::App* app) {
  const fs::path out = require_out(g, "checkpoint");
  const EpisodeSet data = load_set(to.episodes);
  auto enc = open_model(to.init, g, mo, data, app);
  PretrainConfig pc;
  pc.token_mask_rate = token_mask;
  pc.cell_mask_rate = cell_mask;
  if (weights.size() != 3) throw CLI::ValidationError("--task-weights", "expects three values");
  pc.task_weights = {weights[0], weights[1], weights[2]};
  pc.map = mo.map();
  Pretrainer trainer(*enc, pc, to.optim());
  BatchCycler batches(samples_of(data), to.batch);
  std::mt19937_64 sample_rng(derive_seed(g.seed, "sample"));
  std::mt19937_64 mask_rng(derive_seed(g.seed, "mask"));
  std::ostringstream csv;
  csv << "step,task,loss,lr,contributing\n";
  for (int s = 1; s <= to.steps; ++s) {
    const auto batch = batches.next(sample_rng);
    const PretrainStepResult r = trainer.step(batch, mask_rng);
    csv << s << ',' << task_name(r.task) << ',' << r.loss << ',' << r.lr << ',' << r.contributing
        << '\n';
    if (to.save_every > 0 && s % to.save_every == 0) io::save_checkpoint(out, *enc, mo.meta());
  }
  io::save_checkpoint(out, *enc, mo.meta());
  io::write_atomic(with_suffix(out, ".loss.csv"), csv.str());
  std::cout << "pretrained " << to.steps << " updates -> " << out.string() << "\n";
  return 0;
}

int cmd_finetune(const Global& g, ModelOpts& mo, const TrainOpts& to, double lambda,
                 const std::string& label, bool no_sf, int eval_every, double target_sr,
                 const CLI::App* app) {
  const fs::path out = require_out(g, "checkpoint");
  const EpisodeSet data = load_set(to.episodes);
  auto enc = open_model(to.init, g, mo, data, app);
  FinetuneConfig fc;
  fc.lambda = lambda;
  if (label == "goal") {
    fc.label = PseudoLabel::kGoal;
  } else if (label == "fidelity") {
    fc.label = PseudoLabel::kFidelity;
  } else {
    throw CLI::ValidationError("--label", "expects goal or fidelity");
  }
  fc.student_forcing = !no_sf;
  fc.rollout.map = mo.map();
  fc.rollout.max_steps = mo.max_steps;
  Finetuner trainer(*enc, fc, to.optim());
  BatchCycler batches(samples_of(data), to.batch);
  std::mt19937_64 sample_rng(derive_seed(g.seed, "sample"));
  std::mt19937_64 rollout_rng(derive_seed(g.seed, "rollout"));
  EvalConfig ev;
  ev.rollout = fc.rollout;
  ev.threads = g.threads;
  std::ostringstream csv;
  std::ostringstream eval_csv;
  csv << "step,mode,loss,lr\n";
  eval_csv << "step,sr,spl,ndtw\n";
  int done = 0;
  for (int s = 1; s <= to.steps; ++s) {
    const auto batch = batches.next(sample_rng);
    const Finetuner::Result r = trainer.step(batch, rollout_rng);
    csv << s << ',' << (r.teacher ? "teacher" : "student") << ',' << r.loss << ',' << r.lr << '\n';
    done = s;
    if (to.save_every > 0 && s % to.save_every == 0) io::save_checkpoint(out, *enc, mo.meta());
    if (eval_every > 0 && s % eval_every == 0) {
      const MetricSummary sm =
          summarize(evaluate_policy(data.worlds, data.file.episodes, enc.get(), ev));
      eval_csv << s << ',' << sm.sr << ',' << sm.spl << ',' << sm.ndtw << '\n';
      std::cout << "step " << s << " training SR " << sm.sr << "%\n";
      if (target_sr > 0 && sm.sr >= target_sr) break;
    }
  }
  io::save_checkpoint(out, *enc, mo.meta());
  io::write_atomic(with_suffix(out, ".loss.csv"), csv.str());
  if (eval_every > 0) io::write_atomic(with_suffix(out, ".eval.csv"), eval_csv.str());
  std::cout << "fine-tuned " << done << " updates -> " << out.string() << "\n";
  return 0;
}

int cmd_eval(const Global& g, ModelOpts& mo, const std::string& episodes,
             const std::string& checkpoint, const std::string& policy, const CLI::App* app) {
  const fs::path out = require_out(g, "summary prefix");
  const EpisodeSet data = load_set(episodes);
  EvalConfig ev;
  ev.policy = parse_policy(policy);
  ev.seed = derive_seed(g.seed, "sample");
  ev.threads = g.threads;
  std::unique_ptr<Encoders> enc;
  if (ev.policy == Policy::kModel) {
    if (checkpoint.empty()) throw CLI::ValidationError("--checkpoint", "required for the model policy");
    enc = open_model(checkpoint, g, mo, data, app);
  }
  ev.rollout.map = mo.map();
  ev.rollout.max_steps = mo.max_steps;
  const auto outcomes = evaluate_policy(data.worlds, data.file.episodes, enc.get(), ev);
  const MetricSummary sm = summarize(outcomes);
  std::ostringstream lines;
  for (const auto& o : outcomes) {
    io::Json j = io::metric_record_to_json(o.record);
    j["trajectory"] = io::Json::array();
    for (NodeId id : o.trajectory) j["trajectory"].push_back(id.value);
    j["steps"] = io::Json::array();
    for (const auto& l : o.log) j["steps"].push_back(io::step_log_to_json(l));
    lines << j.dump() << '\n';
  }
  io::Json summary = io::summary_to_json(sm);
  summary["policy"] = policy;
  io::write_atomic(with_suffix(out, ".json"), summary.dump(1) + "\n");
  io::write_atomic(with_suffix(out, ".csv"), io::summary_csv(sm));
  io::write_atomic(with_suffix(out, ".jsonl"), lines.str());
  std::cout << policy << ": " << sm.episodes << " episodes, SR " << sm.sr << "%, OSR " << sm.osr
            << "%, SPL " << sm.spl << ", NDTW " << sm.ndtw << ", TL " << sm.tl << ", NE " << sm.ne
            << "\n";
  return 0;
}

int cmd_export_map(const Global& g, ModelOpts& mo, const std::string& episodes,
                   const std::string& checkpoint, int index, int step, const CLI::App* app) {
  const fs::path out = require_out(g, "export prefix");
  const EpisodeSet data = load_set(episodes);
  if (index < 0 || index >= static_cast<int>(data.file.episodes.size())) {
    throw FormatError("episode index out of range");
  }
  const Episode& ep = data.file.episodes[static_cast<std::size_t>(index)];
  const int len = static_cast<int>(ep.expert_path.size());
  if (step < 1 || step > len) {
    throw FormatError("step must lie in 1.." + std::to_string(len) + " for this episode");
  }
  auto enc = open_model(checkpoint, g, mo, data, app);
  const World& w = data.worlds[static_cast<std::size_t>(ep.world_index)];
  NavState state = replay_prefix(w, *enc, mo.map(), ep.expert_path, step, ep.start_heading);
  const StepInputs in = state.inputs();
  auto files = io::export_map(in.map, out);
  const fs::path topo = with_suffix(out, "_topo.json");
  io::write_atomic(topo, io::topo_to_json(state.topo()).dump(1) + "\n");
  files.push_back(topo);
  for (const auto& f : files) std::cout << f.string() << "\n";
  return 0;
}

void inspect_json(const fs::path& path) {
  const io::Json j = io::Json::parse(io::read_file(path));
  const std::string format = j.value("format", "");
  std::cout << path.string() << ": " << format << " v" << j.value("version", 0) << "\n";
  if (format == "hnav-world") {
    const World w = io::world_from_json(j);
    std::cout << "  seed " << w.seed << ", " << w.rooms.size() << " rooms, " << w.doors.size()
              << " doors, " << w.nodes.size() << " nodes, " << w.edges.size() << " edges\n";
    for (const auto& r : w.rooms) {
      std::cout << "  room " << r.id << " (" << r.gx << "," << r.gy << ") "
                << vocabulary().class_name(r.semantic_class) << "\n";
    }
  } else if (format == "hnav-episodes") {
    const io::EpisodeFile f = io::load_episodes(path);
    std::cout << "  " << f.episodes.size() << " episodes over " << f.world_files.size()
              << " worlds\n";
    for (std::size_t i = 0; i < f.episodes.size() && i < 5; ++i) {
      std::cout << "  [" << i << "] " << vocabulary().detokenize(f.episodes[i].instruction) << "\n";
    }
  } else {
    throw FormatError("unrecognized JSON document");
  }
}

int cmd_inspect(const std::string& file) {
  const fs::path path = file;
  const std::string head = io::read_file(path).substr(0, 4);
  if (head == "HNCK") {
    const io::CheckpointInfo info = io::read_checkpoint_info(path);
    std::size_t params = 0;
    for (const auto& t : info.tensors) params += static_cast<std::size_t>(t.rows) * t.cols;
    std::cout << path.string() << ": checkpoint, " << info.tensors.size() << " tensors, " << params
              << " parameters\n";
    for (const auto& [k, v] : info.meta) std::cout << "  " << k << " = " << v << "\n";
  } else if (head == "HNPC") {
    const PointCloud pc = io::load_pointcloud(path);
    std::cout << path.string() << ": point cloud, " << pc.size() << " points, feature dim "
              << pc.feature_dim() << "\n";
  } else if (head == "HNMM") {
    const MetricMap m = io::load_metric_map(path);
    std::size_t observed = 0;
    for (auto o : m.observed) observed += o;
    std::cout << path.string() << ": metric map " << m.spec.u << "x" << m.spec.v << " cells of "
              << m.spec.cell_size << " m, feature dim " << m.feature_dim << ", " << observed
              << " observed\n";
  } else {
    inspect_json(path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid topo-metric vision-language navigation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML file of option values; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  Global g;
  app.add_option("--seed", g.seed, "Run seed; all randomness derives from it")->capture_default_str();
  app.add_option("--out", g.out, "Output path or prefix");
  app.add_option("--threads", g.threads, "Worker threads for evaluation")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();

  WorldOpts wo;
  ModelOpts mo;
  TrainOpts pre_opts;
  TrainOpts ft_opts;

  auto* gen_world = app.add_subcommand("gen-world", "Generate one world");
  wo.add(gen_world);

  auto* gen_eps = app.add_subcommand("gen-episodes", "Generate episodes (and worlds)");
  WorldOpts eps_wo;
  eps_wo.add(gen_eps);
  std::vector<std::string> world_paths;
  int n_worlds = 5;
  int count = 20;
  std::string kind = "goal";
  gen_eps->add_option("--world", world_paths, "Existing world file (repeatable)");
  gen_eps->add_option("--worlds", n_worlds, "Worlds to generate when no --world is given")
      ->capture_default_str();
  gen_eps->add_option("--count", count, "Episodes")->capture_default_str();
  gen_eps->add_option("--kind", kind, "goal, fidelity or mixed")
      ->check(CLI::IsMember({"goal", "fidelity", "mixed"}))
      ->capture_default_str();

  auto* pretrain = app.add_subcommand("pretrain", "Proxy-task pre-training");
  pre_opts.add(pretrain);
  ModelOpts pre_mo;
  pre_mo.add(pretrain);
  double token_mask = kDefaultMaskRate;
  double cell_mask = kDefaultMaskRate;
  std::vector<double> task_weights{5.0, 5.0, 1.0};
  pretrain->add_option("--token-mask", token_mask, "Word masking rate")->capture_default_str();
  pretrain->add_option("--cell-mask", cell_mask, "Cell masking rate")->capture_default_str();
  pretrain->add_option("--task-weights", task_weights, "Mixing weights hmlm hsap msi")
      ->expected(3)
      ->capture_default_str();

  auto* finetune = app.add_subcommand("finetune", "Teacher/student fine-tuning");
  ft_opts.add(finetune);
  ModelOpts ft_mo;
  ft_mo.add(finetune);
  double lambda = 0.2;
  std::string label = "goal";
  bool no_sf = false;
  int eval_every = 0;
  double target_sr = 0.0;
  finetune->add_option("--lambda", lambda, "Teacher-forcing loss weight")->capture_default_str();
  finetune->add_option("--label", label, "Student pseudo label: goal or fidelity")
      ->capture_default_str();
  finetune->add_flag("--no-student-forcing", no_sf, "Teacher-force every update");
  finetune->add_option("--eval-every", eval_every, "Greedy training-set evaluation interval")
      ->capture_default_str();
  finetune->add_option("--target-sr", target_sr, "Stop once training SR (%) reaches this")
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a policy on an episode file");
  ModelOpts ev_mo;
  ev_mo.add(eval);
  std::string ev_episodes;
  std::string ev_ckpt;
  std::string policy = "model";
  eval->add_option("--episodes", ev_episodes, "Episode file")->required();
  eval->add_option("--checkpoint", ev_ckpt, "Model checkpoint");
  eval->add_option("--policy", policy, "model, expert or random")
      ->check(CLI::IsMember({"model", "expert", "random"}))
      ->capture_default_str();

  auto* export_map = app.add_subcommand("export-map", "Dump the maps after an expert prefix");
  ModelOpts ex_mo;
  ex_mo.add(export_map);
  std::string ex_episodes;
  std::string ex_ckpt;
  int ex_index = 0;
  int ex_step = 1;
  export_map->add_option("--episodes", ex_episodes, "Episode file")->required();
  export_map->add_option("--checkpoint", ex_ckpt, "Model checkpoint (fresh model if absent)");
  export_map->add_option("--episode", ex_index, "Episode index")->capture_default_str();
  export_map->add_option("--step", ex_step, "Expert nodes visited before the export")
      ->capture_default_str();

  auto* inspect = app.add_subcommand("inspect", "Print the header of a checkpoint, world, map or cloud");
  std::string inspect_file;
  inspect->add_option("file", inspect_file, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_world) return cmd_gen_world(g, wo);
    if (*gen_eps) return cmd_gen_episodes(g, eps_wo, world_paths, n_worlds, count, kind);
    if (*pretrain) {
      return cmd_pretrain(g, pre_mo, pre_opts, token_mask, cell_mask, task_weights, pretrain);
    }
    if (*finetune) {
      return cmd_finetune(g, ft_mo, ft_opts, lambda, label, no_sf, eval_every, target_sr, finetune);
    }
    if (*eval) return cmd_eval(g, ev_mo, ev_episodes, ev_ckpt, policy, eval);
    if (*export_map) return cmd_export_map(g, ex_mo, ex_episodes, ex_ckpt, ex_index, ex_step, export_map);
    if (*inspect) return cmd_inspect(inspect_file);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
