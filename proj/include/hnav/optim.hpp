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

// AdamW with linear warmup followed by linear decay.

#include <vector>

#include "hnav/tensor.hpp"

namespace hnav {

struct OptimConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  int warmup_steps = 100;
  int total_steps = 10000;
  double clip_norm = 1.0;  // <= 0 disables global gradient clipping
};

class AdamW {
 public:
  AdamW(nn::ParameterStore& store, const OptimConfig& cfg);

  /// Learning rate used by update number `step` (0-based).
  double lr_at(int step) const;
  /// Applies one update from the accumulated gradients, then zeroes them.
  /// Returns the learning rate used.
  double step();
  int steps_taken() const { return t_; }
  const OptimConfig& config() const { return cfg_; }

 private:
  nn::ParameterStore& store_;
  OptimConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int t_ = 0;
};

}  // namespace hnav
