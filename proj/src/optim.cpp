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

#include "hnav/optim.hpp"

#include <algorithm>
#include <cmath>

namespace hnav {

AdamW::AdamW(nn::ParameterStore& store, const OptimConfig& cfg) : store_(store), cfg_(cfg) {
  for (const auto& [name, var] : store_.entries()) {
    m_.emplace_back(var.value().size(), 0.0);
    v_.emplace_back(var.value().size(), 0.0);
  }
}

double AdamW::lr_at(int step) const {
  if (cfg_.warmup_steps > 0 && step < cfg_.warmup_steps) {
    return cfg_.lr * (step + 1) / static_cast<double>(cfg_.warmup_steps);
  }
  const int decay_span = std::max(1, cfg_.total_steps - cfg_.warmup_steps);
  const double frac = 1.0 - static_cast<double>(step - cfg_.warmup_steps) / decay_span;
  return cfg_.lr * std::clamp(frac, 0.0, 1.0);
}

double AdamW::step() {
  const auto& entries = store_.entries();
  double scale = 1.0;
  if (cfg_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, var] : entries) {
      for (double g : var.grad().data) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
  }
  const double lr = lr_at(t_);
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t p = 0; p < entries.size(); ++p) {
    nn::Var var = entries[p].second;
    const auto& grad = var.grad().data;
    if (grad.empty()) continue;
    auto& w = var.mutable_value();
    const bool decay = w.rows > 1 && w.cols > 1;
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      const double g = grad[i] * scale;
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      if (decay) w.data[i] -= lr * cfg_.weight_decay * w.data[i];
      w.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
  store_.zero_grad();
  return lr;
}

}  // namespace hnav
