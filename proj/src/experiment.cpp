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

#include "hnav/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

namespace hnav {

std::vector<PretrainSample> Corpus::samples() const {
  std::vector<PretrainSample> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) {
    out.push_back({&worlds.at(static_cast<std::size_t>(e.world_index)), &e});
  }
  return out;
}

namespace {

constexpr int kMaxAttempts = 64;

}  // namespace

std::vector<World> generate_worlds(std::uint64_t seed, int count, const WorldParams& params) {
  if (count < 1) throw GenerationError("need at least one world");
  const std::uint64_t stream = derive_seed(seed, "world");
  std::vector<World> worlds;
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0;; ++attempt) {
      try {
        worlds.push_back(generate_world(derive_seed(stream, i, attempt), params));
        break;
      } catch (const GenerationError&) {
        if (attempt + 1 >= kMaxAttempts) throw;
      }
    }
  }
  return worlds;
}

std::vector<Episode> generate_episodes(const std::vector<World>& worlds, std::uint64_t seed,
                                       int count, EpisodeKind kind, bool mixed_kinds) {
  if (worlds.empty()) throw GenerationError("no worlds to place episodes in");
  const std::uint64_t stream = derive_seed(seed, "sample");
  std::vector<Episode> eps;
  for (int j = 0; j < count; ++j) {
    const int wi = j % static_cast<int>(worlds.size());
    const EpisodeKind k =
        mixed_kinds ? (j % 2 == 0 ? EpisodeKind::kGoal : EpisodeKind::kFidelity) : kind;
    for (int attempt = 0;; ++attempt) {
      try {
        Episode e = generate_episode(worlds[static_cast<std::size_t>(wi)],
                                     derive_seed(stream, j, attempt), k);
        e.world_index = wi;
        eps.push_back(std::move(e));
        break;
      } catch (const GenerationError&) {
        if (attempt + 1 >= kMaxAttempts) throw;
      }
    }
  }
  return eps;
}

Corpus build_corpus(const CorpusSpec& spec) {
  Corpus c;
  c.worlds = generate_worlds(spec.seed, spec.worlds, spec.params);
  c.episodes = generate_episodes(c.worlds, spec.seed, spec.episodes, spec.kind, spec.mixed_kinds);
  return c;
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::kModel: return "model";
    case Policy::kExpert: return "expert";
    case Policy::kRandom: return "random";
  }
  return "?";
}

Policy parse_policy(const std::string& s) {
  if (s == "model") return Policy::kModel;
  if (s == "expert") return Policy::kExpert;
  if (s == "random") return Policy::kRandom;
  throw FormatError("unknown policy '" + s + "'");
}

std::vector<EpisodeOutcome> evaluate_policy(const std::vector<World>& worlds,
                                            const std::vector<Episode>& episodes,
                                            Encoders* enc, const EvalConfig& cfg) {
  if (cfg.policy == Policy::kModel && enc == nullptr) {
    throw FormatError("model policy needs a checkpoint");
  }
  std::vector<EpisodeOutcome> out(episodes.size());
  auto run_one = [&](std::size_t i) {
    const Episode& e = episodes[i];
    const World& w = worlds.at(static_cast<std::size_t>(e.world_index));
    EpisodeOutcome& o = out[i];
    switch (cfg.policy) {
      case Policy::kModel: {
        RolloutResult r = greedy_rollout(w, e, *enc, cfg.rollout);
        o.trajectory = std::move(r.trajectory.nodes);
        o.log = std::move(r.log);
        break;
      }
      case Policy::kExpert:
        o.trajectory = expert_trajectory(e);
        break;
      case Policy::kRandom: {
        std::mt19937_64 rng(derive_seed(cfg.seed, e.id));
        o.trajectory = random_walk(w, e, cfg.rollout.max_steps, rng);
        break;
      }
    }
    o.record = evaluate(o.trajectory, e, w);
  };
  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(episodes.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < episodes.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < episodes.size() && !failed; i = next++) {
        try {
          run_one(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

MetricSummary summarize(const std::vector<EpisodeOutcome>& outcomes) {
  std::vector<MetricRecord> records;
  records.reserve(outcomes.size());
  for (const auto& o : outcomes) records.push_back(o.record);
  return aggregate(records);
}

BatchCycler::BatchCycler(std::vector<PretrainSample> samples, int batch_size)
    : samples_(std::move(samples)), batch_size_(batch_size) {
  if (samples_.empty()) throw FormatError("empty training corpus");
  if (batch_size_ < 1) throw FormatError("batch size must be positive");
  order_.resize(samples_.size());
  pos_ = order_.size();
}

std::vector<PretrainSample> BatchCycler::next(std::mt19937_64& rng) {
  std::vector<PretrainSample> batch;
  while (static_cast<int>(batch.size()) < batch_size_) {
    if (pos_ == order_.size()) {
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      std::shuffle(order_.begin(), order_.end(), rng);
      pos_ = 0;
    }
    batch.push_back(samples_[order_[pos_++]]);
  }
  return batch;
}

}  // namespace hnav
