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

// Corpus generation, evaluation and training loops shared by the command
// line tools and the acceptance harness.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hnav/agent.hpp"
#include "hnav/env.hpp"
#include "hnav/metrics.hpp"

namespace hnav {

struct CorpusSpec {
  std::uint64_t seed = 0;
  int worlds = 5;
  int episodes = 20;
  WorldParams params;
  EpisodeKind kind = EpisodeKind::kGoal;
  bool mixed_kinds = false;  // alternate goal and fidelity episodes
};

struct Corpus {
  std::vector<World> worlds;
  std::vector<Episode> episodes;

  std::vector<PretrainSample> samples() const;
};

/// World i comes from sub-stream ("world", i); generation failures move to
/// the next attempt index of the same stream.
std::vector<World> generate_worlds(std::uint64_t seed, int count, const WorldParams& params);

/// Episode j lives in world j mod |worlds| and comes from sub-stream
/// ("sample", j).
std::vector<Episode> generate_episodes(const std::vector<World>& worlds, std::uint64_t seed,
                                       int count, EpisodeKind kind, bool mixed_kinds = false);

Corpus build_corpus(const CorpusSpec& spec);

enum class Policy { kModel, kExpert, kRandom };
const char* policy_name(Policy p);
Policy parse_policy(const std::string& s);

struct EpisodeOutcome {
  MetricRecord record;
  std::vector<NodeId> trajectory;
  std::vector<StepLog> log;
};

struct EvalConfig {
  Policy policy = Policy::kModel;
  RolloutConfig rollout;
  std::uint64_t seed = 0;  // random walk stream
  int threads = 1;
};

/// Runs the policy on every episode. Episodes are independent, so they may
/// run on several threads; results keep episode order.
std::vector<EpisodeOutcome> evaluate_policy(const std::vector<World>& worlds,
                                            const std::vector<Episode>& episodes,
                                            Encoders* enc, const EvalConfig& cfg);

MetricSummary summarize(const std::vector<EpisodeOutcome>& outcomes);

/// Minibatches cycle through a per-epoch shuffle drawn from `rng`.
class BatchCycler {
 public:
  BatchCycler(std::vector<PretrainSample> samples, int batch_size);
  std::vector<PretrainSample> next(std::mt19937_64& rng);

 private:
  std::vector<PretrainSample> samples_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  int batch_size_ = 1;
};

}  // namespace hnav
