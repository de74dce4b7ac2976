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

// Minimal reverse-mode automatic differentiation over dense row-major
// double matrices. Every op records its parents and a backward closure
// unless gradient recording is disabled on the calling thread.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hnav/common.hpp"

namespace hnav::nn {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}
  Matrix(int r, int c, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
};

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Matrix& ensure_grad();
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  Matrix& grad() { return node_->ensure_grad(); }
  int rows() const { return node_->value.rows; }
  int cols() const { return node_->value.cols; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  double item() const;
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Matrix m);
Var parameter(Matrix m);

/// Seeds d(loss)/d(loss) = 1 and propagates to every reachable parameter.
/// Gradients accumulate into parameter nodes.
void backward(const Var& loss);

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// ---- ops ------------------------------------------------------------------

Var matmul(const Var& a, const Var& b);     // a[m x k] * b[k x n]
Var matmul_nt(const Var& a, const Var& b);  // a[m x k] * b[n x k]^T
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);        // elementwise
Var add_row(const Var& a, const Var& row);  // broadcast a 1 x c row
Var scale(const Var& a, double s);
Var mul_scalar(const Var& a, const Var& s);  // s is 1 x 1
Var one_minus(const Var& a);
Var gelu(const Var& a);
Var sigmoid(const Var& a);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-12);
Var softmax_rows(const Var& a);
Var slice_cols(const Var& a, int begin, int end);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(const Var& a, std::span<const int> rows);
Var transpose(const Var& a);
Var mean_rows(const Var& a);
Var sum_all(const Var& a);

/// w * d + b elementwise over a constant matrix d; entries where mask is 0
/// are forced to 0. w and b are 1 x 1.
Var scalar_affine(const Matrix& d, const std::vector<std::uint8_t>& mask, const Var& w,
                  const Var& b);

/// Mean over rows of -log softmax(logits)[target]. Rows with target < 0 are
/// skipped; returns 0 when every row is skipped.
Var cross_entropy(const Var& logits, std::span<const int> targets);

/// Mean binary cross-entropy with logits against 0/1 targets of the same shape.
Var bce_with_logits(const Var& logits, const Matrix& targets);

// ---- parameter containers -------------------------------------------------

class ParameterStore {
 public:
  Var add(std::string name, Matrix init);
  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  Var find(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

}  // namespace hnav::nn
