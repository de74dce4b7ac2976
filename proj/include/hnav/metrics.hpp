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

// Trajectory metrics: TL, NE, SR, OSR, SPL, NDTW, SDTW.

#include <span>
#include <vector>

#include "hnav/env.hpp"

namespace hnav {

inline constexpr double kSuccessRadius = 3.0;

struct MetricRecord {
  std::uint64_t episode_id = 0;
  double tl = 0.0;
  double ne = 0.0;
  double sr = 0.0;
  double osr = 0.0;
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
};

struct MetricSummary {
  std::size_t episodes = 0;
  double tl = 0.0;
  double ne = 0.0;
  double sr = 0.0;   // percent
  double osr = 0.0;  // percent
  double spl = 0.0;
  double ndtw = 0.0;
  double sdtw = 0.0;
};

/// Dynamic time warping cost between two position sequences with Euclidean
/// point distance.
double dtw(std::span<const Vec3> query, std::span<const Vec3> reference);

/// exp(-DTW / (|reference| * threshold)).
double ndtw(std::span<const Vec3> query, std::span<const Vec3> reference,
            double threshold = kSuccessRadius);

std::vector<Vec3> positions_of(const World& world, std::span<const NodeId> path);

/// `trajectory` is the sequence of environment nodes visited, start first.
MetricRecord evaluate(std::span<const NodeId> trajectory, const Episode& episode,
                      const World& world);

MetricSummary aggregate(std::span<const MetricRecord> records);

}  // namespace hnav
