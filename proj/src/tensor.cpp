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

#include "hnav/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

#include "hnav/kernels.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace hnav::nn {

#if defined(__GLIBC__)
namespace {
// Activations of a few MB are allocated and freed every step. Keep them in
// the heap rather than fresh page-faulting mappings.
const bool kHeapTuned = [] {
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
  return true;
}();
}  // namespace
#endif

Matrix::Matrix(int r, int c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != static_cast<std::size_t>(r) * c) {
    throw DimensionError("matrix data does not match " + std::to_string(r) + "x" +
                         std::to_string(c));
  }
}

bool Matrix::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Node::ensure_grad() {
  if (!grad.same_shape(value)) grad = Matrix(value.rows, value.cols, 0.0);
  return grad;
}

double Var::item() const {
  if (node_->value.size() != 1) throw DimensionError("item() needs a 1x1 tensor");
  return node_->value.data[0];
}

namespace {

thread_local bool tl_grad_enabled = true;

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

Var make_result(Matrix value, std::initializer_list<Var> parents,
                std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (tl_grad_enabled) {
    bool any = false;
    for (const Var& p : parents) any = any || p.requires_grad();
    if (any) {
      n->requires_grad = true;
      for (const Var& p : parents) n->parents.push_back(p.shared());
      n->backward = std::move(bw);
    }
  }
  return Var(std::move(n));
}

Var make_result_vec(Matrix value, const std::vector<Var>& parents,
                    std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (tl_grad_enabled) {
    bool any = false;
    for (const Var& p : parents) any = any || p.requires_grad();
    if (any) {
      n->requires_grad = true;
      for (const Var& p : parents) n->parents.push_back(p.shared());
      n->backward = std::move(bw);
    }
  }
  return Var(std::move(n));
}

inline bool wants(const Node* n) { return n->requires_grad; }

}  // namespace

bool grad_enabled() { return tl_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(tl_grad_enabled) { tl_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { tl_grad_enabled = prev_; }

Var constant(Matrix m) {
  auto n = std::make_shared<Node>();
  n->value = std::move(m);
  return Var(std::move(n));
}

Var parameter(Matrix m) {
  auto n = std::make_shared<Node>();
  n->value = std::move(m);
  n->requires_grad = true;
  return Var(std::move(n));
}

void backward(const Var& loss) {
  if (loss.value().size() != 1) throw DimensionError("backward() needs a scalar loss");
  if (!loss.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && !seen.contains(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  loss.node()->ensure_grad().data[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) {
      n->ensure_grad();
      n->backward(*n);
    }
  }
}

Var matmul(const Var& a, const Var& b) {
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  if (A.cols != B.rows) {
    throw DimensionError("matmul " + shape_str(A) + " * " + shape_str(B));
  }
  Matrix C(A.rows, B.cols);
  kernels::gemm_nn(A.rows, B.cols, A.cols, A.data.data(), B.data.data(), C.data.data());
  Node* pa = a.node();
  Node* pb = b.node();
  return make_result(std::move(C), {a, b}, [pa, pb](Node& self) {
    const Matrix& dC = self.grad;
    const Matrix& A = pa->value;
    const Matrix& B = pb->value;
    if (wants(pa)) {
      kernels::gemm_nt(A.rows, A.cols, B.cols, dC.data.data(), B.data.data(),
                       pa->ensure_grad().data.data());
    }
    if (wants(pb)) {
      kernels::gemm_tn(B.rows, B.cols, A.rows, A.data.data(), dC.data.data(),
                       pb->ensure_grad().data.data());
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  if (A.cols != B.cols) {
    throw DimensionError("matmul_nt " + shape_str(A) + " * " + shape_str(B) + "^T");
  }
  Matrix C(A.rows, B.rows);
  kernels::gemm_nt(A.rows, B.rows, A.cols, A.data.data(), B.data.data(), C.data.data());
  Node* pa = a.node();
  Node* pb = b.node();
  return make_result(std::move(C), {a, b}, [pa, pb](Node& self) {
    const Matrix& dC = self.grad;
    const Matrix& A = pa->value;
    const Matrix& B = pb->value;
    if (wants(pa)) {
      kernels::gemm_nn(A.rows, A.cols, B.rows, dC.data.data(), B.data.data(),
                       pa->ensure_grad().data.data());
    }
    if (wants(pb)) {
      kernels::gemm_tn(B.rows, B.cols, A.rows, dC.data.data(), A.data.data(),
                       pb->ensure_grad().data.data());
    }
  });
}

Var add(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionError("add " + shape_str(a.value()) + " + " + shape_str(b.value()));
  }
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.value().data[i];
  Node* pa = a.node();
  Node* pb = b.node();
  return make_result(std::move(out), {a, b}, [pa, pb](Node& self) {
    const auto& g = self.grad.data;
    if (wants(pa)) kernels::axpy(g.size(), 1.0, g.data(), pa->ensure_grad().data.data());
    if (wants(pb)) kernels::axpy(g.size(), 1.0, g.data(), pb->ensure_grad().data.data());
  });
}

Var sub(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionError("sub " + shape_str(a.value()) + " - " + shape_str(b.value()));
  }
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.value().data[i];
  Node* pa = a.node();
  Node* pb = b.node();
  return make_result(std::move(out), {a, b}, [pa, pb](Node& self) {
    const auto& g = self.grad.data;
    if (wants(pa)) kernels::axpy(g.size(), 1.0, g.data(), pa->ensure_grad().data.data());
    if (wants(pb)) kernels::axpy(g.size(), -1.0, g.data(), pb->ensure_grad().data.data());
  });
}

Var mul(const Var& a, const Var& b) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionError("mul " + shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b.value().data[i];
  Node* pa = a.node();
  Node* pb = b.node();
  return make_result(std::move(out), {a, b}, [pa, pb](Node& self) {
    const auto& g = self.grad.data;
    if (wants(pa)) {
      auto& ga = pa->ensure_grad().data;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * pb->value.data[i];
    }
    if (wants(pb)) {
      auto& gb = pb->ensure_grad().data;
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * pa->value.data[i];
    }
  });
}

Var add_row(const Var& a, const Var& row) {
  const Matrix& A = a.value();
  const Matrix& R = row.value();
  if (R.rows != 1 || R.cols != A.cols) {
    throw DimensionError("add_row " + shape_str(A) + " + " + shape_str(R));
  }
  Matrix out = A;
  for (int r = 0; r < out.rows; ++r) kernels::axpy(out.cols, 1.0, R.data.data(), out.row(r));
  Node* pa = a.node();
  Node* pr = row.node();
  return make_result(std::move(out), {a, row}, [pa, pr](Node& self) {
    const Matrix& g = self.grad;
    if (wants(pa)) kernels::axpy(g.size(), 1.0, g.data.data(), pa->ensure_grad().data.data());
    if (wants(pr)) {
      double* gr = pr->ensure_grad().data.data();
      for (int r = 0; r < g.rows; ++r) kernels::axpy(g.cols, 1.0, g.row(r), gr);
    }
  });
}

Var scale(const Var& a, double s) {
  Matrix out = a.value();
  for (auto& x : out.data) x *= s;
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa, s](Node& self) {
    const auto& g = self.grad.data;
    kernels::axpy(g.size(), s, g.data(), pa->ensure_grad().data.data());
  });
}

Var mul_scalar(const Var& a, const Var& s) {
  if (s.value().size() != 1) throw DimensionError("mul_scalar needs a 1x1 scalar");
  const double sv = s.value().data[0];
  Matrix out = a.value();
  for (auto& x : out.data) x *= sv;
  Node* pa = a.node();
  Node* ps = s.node();
  return make_result(std::move(out), {a, s}, [pa, ps](Node& self) {
    const auto& g = self.grad.data;
    if (wants(pa)) {
      kernels::axpy(g.size(), ps->value.data[0], g.data(), pa->ensure_grad().data.data());
    }
    if (wants(ps)) {
      ps->ensure_grad().data[0] += kernels::dot(g.size(), g.data(), pa->value.data.data());
    }
  });
}

Var one_minus(const Var& a) {
  Matrix out = a.value();
  for (auto& x : out.data) x = 1.0 - x;
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa](Node& self) {
    const auto& g = self.grad.data;
    kernels::axpy(g.size(), -1.0, g.data(), pa->ensure_grad().data.data());
  });
}

Var gelu(const Var& a) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  Matrix out = a.value();
  for (auto& x : out.data) {
    const double t = std::tanh(kC * (x + 0.044715 * x * x * x));
    x = 0.5 * x * (1.0 + t);
  }
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa](Node& self) {
    const auto& g = self.grad.data;
    auto& ga = pa->ensure_grad().data;
    const auto& xs = pa->value.data;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = xs[i];
      const double u = kC * (x + 0.044715 * x * x * x);
      const double t = std::tanh(u);
      const double du = kC * (1.0 + 3.0 * 0.044715 * x * x);
      ga[i] += g[i] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
    }
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value();
  for (auto& x : out.data) x = 1.0 / (1.0 + std::exp(-x));
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa](Node& self) {
    const auto& g = self.grad.data;
    auto& ga = pa->ensure_grad().data;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value.data[i];
      ga[i] += g[i] * y * (1.0 - y);
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Matrix& X = x.value();
  const int n = X.cols;
  if (gamma.rows() != 1 || gamma.cols() != n || beta.rows() != 1 || beta.cols() != n) {
    throw DimensionError("layer_norm parameter shape mismatch");
  }
  auto xhat = std::make_shared<Matrix>(X.rows, n);
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(X.rows));
  Matrix out(X.rows, n);
  const double* g = gamma.value().data.data();
  const double* b = beta.value().data.data();
  for (int r = 0; r < X.rows; ++r) {
    const double* xr = X.row(r);
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<std::size_t>(r)] = is;
    double* hr = xhat->row(r);
    double* orow = out.row(r);
    for (int j = 0; j < n; ++j) {
      hr[j] = (xr[j] - mean) * is;
      orow[j] = g[j] * hr[j] + b[j];
    }
  }
  Node* px = x.node();
  Node* pg = gamma.node();
  Node* pb = beta.node();
  return make_result(std::move(out), {x, gamma, beta},
                     [px, pg, pb, xhat, inv_std, n](Node& self) {
    const Matrix& dy = self.grad;
    const double* gv = pg->value.data.data();
    if (wants(pg)) {
      double* gg = pg->ensure_grad().data.data();
      for (int r = 0; r < dy.rows; ++r) {
        for (int j = 0; j < n; ++j) gg[j] += dy(r, j) * (*xhat)(r, j);
      }
    }
    if (wants(pb)) {
      double* gb = pb->ensure_grad().data.data();
      for (int r = 0; r < dy.rows; ++r) kernels::axpy(n, 1.0, dy.row(r), gb);
    }
    if (wants(px)) {
      Matrix& gx = px->ensure_grad();
      std::vector<double> dxhat(static_cast<std::size_t>(n));
      for (int r = 0; r < dy.rows; ++r) {
        double s1 = 0.0;
        double s2 = 0.0;
        const double* hr = xhat->row(r);
        for (int j = 0; j < n; ++j) {
          dxhat[j] = dy(r, j) * gv[j];
          s1 += dxhat[j];
          s2 += dxhat[j] * hr[j];
        }
        const double is = (*inv_std)[static_cast<std::size_t>(r)];
        double* gr = gx.row(r);
        for (int j = 0; j < n; ++j) {
          gr[j] += is * (dxhat[j] - s1 / n - hr[j] * s2 / n);
        }
      }
    }
  });
}

Var softmax_rows(const Var& a) {
  const Matrix& A = a.value();
  Matrix out(A.rows, A.cols);
  for (int r = 0; r < A.rows; ++r) {
    const double* ar = A.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < A.cols; ++j) mx = std::max(mx, ar[j]);
    double* orow = out.row(r);
    for (int j = 0; j < A.cols; ++j) orow[j] = ar[j] - mx;
    kernels::vexp(static_cast<std::size_t>(A.cols), orow, orow);
    double sum = 0.0;
    for (int j = 0; j < A.cols; ++j) sum += orow[j];
    const double inv = 1.0 / sum;
    for (int j = 0; j < A.cols; ++j) orow[j] *= inv;
  }
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa](Node& self) {
    const Matrix& dy = self.grad;
    Matrix& ga = pa->ensure_grad();
    for (int r = 0; r < dy.rows; ++r) {
      const double* yr = self.value.row(r);
      const double* dr = dy.row(r);
      const double s = kernels::dot(dy.cols, dr, yr);
      double* gr = ga.row(r);
      for (int j = 0; j < dy.cols; ++j) gr[j] += yr[j] * (dr[j] - s);
    }
  });
}

Var slice_cols(const Var& a, int begin, int end) {
  const Matrix& A = a.value();
  if (begin < 0 || end > A.cols || begin > end) throw DimensionError("slice_cols out of range");
  const int w = end - begin;
  Matrix out(A.rows, w);
  for (int r = 0; r < A.rows; ++r) std::copy_n(A.row(r) + begin, w, out.row(r));
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa, begin, w](Node& self) {
    const Matrix& g = self.grad;
    Matrix& ga = pa->ensure_grad();
    for (int r = 0; r < g.rows; ++r) kernels::axpy(w, 1.0, g.row(r), ga.row(r) + begin);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const int rows = parts[0].rows();
  int cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Node*> nodes;
  std::vector<int> offsets;
  int off = 0;
  for (const Var& p : parts) {
    for (int r = 0; r < rows; ++r) std::copy_n(p.value().row(r), p.cols(), out.row(r) + off);
    nodes.push_back(p.node());
    offsets.push_back(off);
    off += p.cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return make_result_vec(std::move(out), ps, [nodes, offsets](Node& self) {
    const Matrix& g = self.grad;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Node* p = nodes[i];
      if (!wants(p)) continue;
      Matrix& gp = p->ensure_grad();
      for (int r = 0; r < g.rows; ++r) {
        kernels::axpy(gp.cols, 1.0, g.row(r) + offsets[i], gp.row(r));
      }
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  const int cols = parts[0].cols();
  int rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<Node*> nodes;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data.begin(), p.value().data.end(), out.data.begin() + off);
    nodes.push_back(p.node());
    offsets.push_back(off);
    off += p.value().size();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return make_result_vec(std::move(out), ps, [nodes, offsets](Node& self) {
    const Matrix& g = self.grad;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Node* p = nodes[i];
      if (!wants(p)) continue;
      Matrix& gp = p->ensure_grad();
      kernels::axpy(gp.size(), 1.0, g.data.data() + offsets[i], gp.data.data());
    }
  });
}

Var gather_rows(const Var& a, std::span<const int> rows) {
  const Matrix& A = a.value();
  Matrix out(static_cast<int>(rows.size()), A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= A.rows) throw DimensionError("gather_rows index out of range");
    std::copy_n(A.row(rows[i]), A.cols, out.row(static_cast<int>(i)));
  }
  Node* pa = a.node();
  std::vector<int> idx(rows.begin(), rows.end());
  return make_result(std::move(out), {a}, [pa, idx](Node& self) {
    const Matrix& g = self.grad;
    Matrix& ga = pa->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      kernels::axpy(g.cols, 1.0, g.row(static_cast<int>(i)), ga.row(idx[i]));
    }
  });
}

Var transpose(const Var& a) {
  const Matrix& v = a.value();
  Matrix out(v.cols, v.rows);
  for (int r = 0; r < v.rows; ++r) {
    for (int c = 0; c < v.cols; ++c) out(c, r) = v(r, c);
  }
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa](Node& self) {
    if (!wants(pa)) return;
    Matrix& g = pa->ensure_grad();
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) g(r, c) += self.grad(c, r);
    }
  });
}

Var mean_rows(const Var& a) {
  const Matrix& A = a.value();
  if (A.rows == 0) throw DimensionError("mean_rows of an empty matrix");
  Matrix out(1, A.cols);
  for (int r = 0; r < A.rows; ++r) kernels::axpy(A.cols, 1.0, A.row(r), out.data.data());
  for (auto& x : out.data) x /= A.rows;
  Node* pa = a.node();
  return make_result(std::move(out), {a}, [pa](Node& self) {
    Matrix& ga = pa->ensure_grad();
    const double inv = 1.0 / ga.rows;
    for (int r = 0; r < ga.rows; ++r) kernels::axpy(ga.cols, inv, self.grad.data.data(), ga.row(r));
  });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (double x : a.value().data) s += x;
  Node* pa = a.node();
  return make_result(Matrix(1, 1, s), {a}, [pa](Node& self) {
    const double g = self.grad.data[0];
    for (auto& x : pa->ensure_grad().data) x += g;
  });
}

Var scalar_affine(const Matrix& d, const std::vector<std::uint8_t>& mask, const Var& w,
                  const Var& b) {
  if (mask.size() != d.size()) throw DimensionError("scalar_affine mask mismatch");
  const double wv = w.item();
  const double bv = b.item();
  Matrix out(d.rows, d.cols);
  for (std::size_t i = 0; i < d.size(); ++i) out.data[i] = mask[i] ? wv * d.data[i] + bv : 0.0;
  Node* pw = w.node();
  Node* pb = b.node();
  auto dist = std::make_shared<Matrix>(d);
  auto m = std::make_shared<std::vector<std::uint8_t>>(mask);
  return make_result(std::move(out), {w, b}, [pw, pb, dist, m](Node& self) {
    const auto& g = self.grad.data;
    double gw = 0.0;
    double gb = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(*m)[i]) continue;
      gw += g[i] * dist->data[i];
      gb += g[i];
    }
    if (wants(pw)) pw->ensure_grad().data[0] += gw;
    if (wants(pb)) pb->ensure_grad().data[0] += gb;
  });
}

Var cross_entropy(const Var& logits, std::span<const int> targets) {
  const Matrix& L = logits.value();
  if (targets.size() != static_cast<std::size_t>(L.rows)) {
    throw DimensionError("cross_entropy target count mismatch");
  }
  auto probs = std::make_shared<Matrix>(L.rows, L.cols);
  double total = 0.0;
  int counted = 0;
  for (int r = 0; r < L.rows; ++r) {
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0) continue;
    if (t >= L.cols) throw LabelError("cross_entropy target out of range");
    const double* lr = L.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < L.cols; ++j) mx = std::max(mx, lr[j]);
    double sum = 0.0;
    for (int j = 0; j < L.cols; ++j) sum += std::exp(lr[j] - mx);
    const double lse = mx + std::log(sum);
    total += lse - lr[t];
    double* pr = probs->row(r);
    for (int j = 0; j < L.cols; ++j) pr[j] = std::exp(lr[j] - lse);
    ++counted;
  }
  const double loss = counted > 0 ? total / counted : 0.0;
  Node* pl = logits.node();
  std::vector<int> tg(targets.begin(), targets.end());
  return make_result(Matrix(1, 1, loss), {logits}, [pl, probs, tg, counted](Node& self) {
    if (counted == 0) return;
    const double g = self.grad.data[0] / counted;
    Matrix& gl = pl->ensure_grad();
    for (int r = 0; r < gl.rows; ++r) {
      const int t = tg[static_cast<std::size_t>(r)];
      if (t < 0) continue;
      double* gr = gl.row(r);
      const double* pr = probs->row(r);
      for (int j = 0; j < gl.cols; ++j) gr[j] += g * (pr[j] - (j == t ? 1.0 : 0.0));
    }
  });
}

Var bce_with_logits(const Var& logits, const Matrix& targets) {
  const Matrix& L = logits.value();
  if (!L.same_shape(targets)) throw DimensionError("bce_with_logits shape mismatch");
  if (L.size() == 0) return constant(Matrix(1, 1, 0.0));
  double total = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) {
    const double x = L.data[i];
    const double t = targets.data[i];
    total += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  const double n = static_cast<double>(L.size());
  Node* pl = logits.node();
  auto tg = std::make_shared<Matrix>(targets);
  return make_result(Matrix(1, 1, total / n), {logits}, [pl, tg, n](Node& self) {
    const double g = self.grad.data[0] / n;
    auto& gl = pl->ensure_grad().data;
    const auto& xs = pl->value.data;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-xs[i]));
      gl[i] += g * (s - tg->data[i]);
    }
  });
}

Var ParameterStore::add(std::string name, Matrix init) {
  if (find(name)) throw Error("duplicate parameter name " + name);
  Var v = parameter(std::move(init));
  entries_.emplace_back(std::move(name), v);
  return v;
}

Var ParameterStore::find(const std::string& name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return v;
  }
  return {};
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += v.value().size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [name, v] : entries_) {
    Matrix& g = v.grad();
    std::fill(g.data.begin(), g.data.end(), 0.0);
  }
}

}  // namespace hnav::nn
