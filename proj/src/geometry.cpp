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

#include "hnav/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hnav {

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {}

Pose Pose::from_yaw(double yaw, const Vec3& translation) {
  Mat3 r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  return {r, translation};
}

double Pose::yaw() const { return std::atan2(rotation_(1, 0), rotation_(0, 0)); }

Pose Pose::inverse() const {
  Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

Pose operator*(const Pose& a, const Pose& b) {
  return {a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_};
}

double Pose::orthonormality_error() const {
  return (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool Pose::is_valid(double tol) const {
  return rotation_.allFinite() && translation_.allFinite() &&
         orthonormality_error() < tol && std::abs(rotation_.determinant() - 1.0) < tol;
}

void CameraIntrinsics::validate() const {
  if (grid_h < 1 || grid_w < 1) throw DimensionError("camera grid must be at least 1x1");
  if (!(hfov > 0.0 && hfov < std::numbers::pi) || !(vfov > 0.0 && vfov < std::numbers::pi)) {
    throw DimensionError("camera field of view must lie in (0, pi)");
  }
  if (!(max_range > 0.0)) throw DimensionError("max_range must be positive");
}

double CameraIntrinsics::azimuth(int col) const {
  return 0.5 * hfov - (col + 0.5) * hfov / grid_w;
}

double CameraIntrinsics::elevation(int row) const {
  return 0.5 * vfov - (row + 0.5) * vfov / grid_h;
}

Vec3 CameraIntrinsics::ray(int row, int col) const {
  const double az = azimuth(col);
  const double el = elevation(row);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

void PointCloud::reserve(std::size_t n) {
  positions_.reserve(n);
  features_.reserve(n * static_cast<std::size_t>(dim_));
  semantics_.reserve(n);
}

void PointCloud::add(const Vec3& position, std::span<const double> feature,
                     SemanticBits semantics) {
  if (feature.size() != static_cast<std::size_t>(dim_)) {
    throw DimensionError("point feature has dimension " + std::to_string(feature.size()) +
                         ", cloud expects " + std::to_string(dim_));
  }
  positions_.push_back(position);
  features_.insert(features_.end(), feature.begin(), feature.end());
  semantics_.push_back(semantics);
}

void PointCloud::append(const PointCloud& other) {
  if (other.empty()) return;
  if (empty() && dim_ == 0) dim_ = other.dim_;
  if (other.dim_ != dim_) throw DimensionError("cannot append clouds of different feature dims");
  positions_.insert(positions_.end(), other.positions_.begin(), other.positions_.end());
  features_.insert(features_.end(), other.features_.begin(), other.features_.end());
  semantics_.insert(semantics_.end(), other.semantics_.begin(), other.semantics_.end());
}

void MapSpec::validate() const {
  if (u < 1 || v < 1 || u % 2 == 0 || v % 2 == 0) {
    throw DimensionError("map dimensions must be odd and positive");
  }
  if (!(cell_size > 0.0)) throw DimensionError("cell_size must be positive");
  if (!(z_min < z_max)) throw DimensionError("z_min must be below z_max");
}

Eigen::Vector2d MapSpec::cell_center(int cu, int cv) const {
  return {(cu - center_u()) * cell_size, (cv - center_v()) * cell_size};
}

MetricMap::MetricMap(const MapSpec& s, int dim)
    : spec(s),
      feature_dim(dim),
      features(s.cells() * static_cast<std::size_t>(dim), 0.0),
      counts(s.cells(), 0),
      observed(s.cells(), 0),
      semantics(s.cells(), 0),
      navigable(s.cells(), 0),
      masked(s.cells(), 0),
      cell_nodes(s.cells()) {}

std::size_t MetricMap::observed_count() const {
  std::size_t n = 0;
  for (auto o : observed) n += o ? 1 : 0;
  return n;
}

PointCloud lift(const FeatureGrid& features, const DepthGrid& depths,
                const CameraIntrinsics& intr, const Pose& pose,
                std::span<const SemanticBits> semantics) {
  if (features.h != depths.h || features.w != depths.w) {
    throw DimensionError("feature grid " + std::to_string(features.h) + "x" +
                         std::to_string(features.w) + " does not match depth grid " +
                         std::to_string(depths.h) + "x" + std::to_string(depths.w));
  }
  if (features.h != intr.grid_h || features.w != intr.grid_w) {
    throw DimensionError("grid does not match camera intrinsics");
  }
  if (!semantics.empty() &&
      semantics.size() != static_cast<std::size_t>(features.h) * features.w) {
    throw DimensionError("semantic grid size mismatch");
  }
  PointCloud pc(features.dim);
  pc.reserve(static_cast<std::size_t>(features.h) * features.w);
  for (int r = 0; r < features.h; ++r) {
    for (int c = 0; c < features.w; ++c) {
      const double d = depths.at(r, c);
      if (!(d > 0.0) || d > intr.max_range) continue;
      const Vec3 p = pose.apply(intr.ray(r, c) * d);
      const SemanticBits s =
          semantics.empty() ? 0 : semantics[static_cast<std::size_t>(r) * features.w + c];
      pc.add(p, features.at(r, c), s);
    }
  }
  return pc;
}

PointCloud transform_pointcloud(const PointCloud& pc, const Pose& t) {
  PointCloud out = pc;
  for (std::size_t i = 0; i < out.size(); ++i) out.position(i) = t.apply(pc.position(i));
  return out;
}

bool point_to_cell(const MapSpec& spec, double x, double y, int& cu, int& cv) {
  const double fu = std::floor(x / spec.cell_size + 0.5);
  const double fv = std::floor(y / spec.cell_size + 0.5);
  const double iu = fu + spec.center_u();
  const double iv = fv + spec.center_v();
  if (iu < 0 || iu >= spec.u || iv < 0 || iv >= spec.v) return false;
  cu = static_cast<int>(iu);
  cv = static_cast<int>(iv);
  return true;
}

MetricMap splat(const PointCloud& pc, const MapSpec& spec) {
  spec.validate();
  MetricMap map(spec, pc.feature_dim());
  const auto dim = static_cast<std::size_t>(pc.feature_dim());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Vec3& p = pc.position(i);
    if (p.z() < spec.z_min || p.z() > spec.z_max) continue;
    int cu = 0;
    int cv = 0;
    if (!point_to_cell(spec, p.x(), p.y(), cu, cv)) continue;
    const std::size_t cell = spec.index(cu, cv);
    double* dst = map.features.data() + cell * dim;
    const auto f = pc.feature(i);
    for (std::size_t k = 0; k < dim; ++k) dst[k] += f[k];
    map.counts[cell] += 1;
    map.semantics[cell] |= pc.semantics(i);
  }
  for (std::size_t cell = 0; cell < spec.cells(); ++cell) {
    if (map.counts[cell] == 0) continue;
    map.observed[cell] = 1;
    const double n = map.counts[cell];
    double* dst = map.features.data() + cell * dim;
    for (std::size_t k = 0; k < dim; ++k) dst[k] /= n;
  }
  return map;
}

}  // namespace hnav
