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

// Rigid transforms, inverse projection of depth grids into feature-tagged
// point clouds ("lift"), and top-down average pooling into a grid ("splat").
//
// Axis convention everywhere: +x forward, +y left, +z up; heading 0 is +x.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <span>
#include <vector>

#include "hnav/common.hpp"

namespace hnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return {}; }
  // Rotation about +z by `yaw` radians followed by translation.
  static Pose from_yaw(double yaw, const Vec3& translation = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  double yaw() const;

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Pose inverse() const;
  // (a * b).apply(p) == a.apply(b.apply(p))
  friend Pose operator*(const Pose& a, const Pose& b);

  // Orthonormality residual ||R^T R - I||_inf.
  double orthonormality_error() const;
  bool is_valid(double tol = 1e-9) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }

struct CameraIntrinsics {
  int grid_h = 7;
  int grid_w = 7;
  double hfov = 0.5235987755982988;  // 30 degrees
  double vfov = 1.5707963267948966;  // 90 degrees
  double max_range = 10.0;

  void validate() const;
  // Unit ray through the center of cell (row, col) in the camera frame.
  // Rows run top to bottom, columns left to right.
  Vec3 ray(int row, int col) const;
  double azimuth(int col) const;
  double elevation(int row) const;
};

/// grid_h x grid_w x dim features, row-major with the channel innermost.
struct FeatureGrid {
  int h = 0;
  int w = 0;
  int dim = 0;
  std::vector<double> values;

  FeatureGrid() = default;
  FeatureGrid(int h_, int w_, int dim_)
      : h(h_), w(w_), dim(dim_), values(static_cast<std::size_t>(h_) * w_ * dim_, 0.0) {}

  std::span<double> at(int r, int c) {
    return {values.data() + (static_cast<std::size_t>(r) * w + c) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> at(int r, int c) const {
    return {values.data() + (static_cast<std::size_t>(r) * w + c) * dim,
            static_cast<std::size_t>(dim)};
  }
};

struct DepthGrid {
  int h = 0;
  int w = 0;
  std::vector<double> values;

  DepthGrid() = default;
  DepthGrid(int h_, int w_)
      : h(h_), w(w_), values(static_cast<std::size_t>(h_) * w_, 0.0) {}

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * w + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * w + c]; }
};

/// Points stored column-wise: positions, a flat feature block, semantics.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(int feature_dim) : dim_(feature_dim) {}

  int feature_dim() const { return dim_; }
  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }

  void reserve(std::size_t n);
  void add(const Vec3& position, std::span<const double> feature,
           SemanticBits semantics = 0);
  // Appends every point of `other`. Feature dimensions must agree.
  void append(const PointCloud& other);

  const Vec3& position(std::size_t i) const { return positions_[i]; }
  Vec3& position(std::size_t i) { return positions_[i]; }
  std::span<const double> feature(std::size_t i) const {
    return {features_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  SemanticBits semantics(std::size_t i) const { return semantics_[i]; }

  const std::vector<Vec3>& positions() const { return positions_; }
  const std::vector<double>& features() const { return features_; }
  const std::vector<SemanticBits>& semantic_bits() const { return semantics_; }

 private:
  int dim_ = 0;
  std::vector<Vec3> positions_;
  std::vector<double> features_;
  std::vector<SemanticBits> semantics_;
};

struct MapSpec {
  int u = 21;  // cells along +x (forward)
  int v = 21;  // cells along +y (left)
  double cell_size = 0.5;
  double z_min = -0.5;
  double z_max = 2.5;

  void validate() const;
  int center_u() const { return u / 2; }
  int center_v() const { return v / 2; }
  std::size_t cells() const { return static_cast<std::size_t>(u) * v; }
  std::size_t index(int cu, int cv) const {
    return static_cast<std::size_t>(cu) * v + cv;
  }
  double half_extent_x() const { return 0.5 * u * cell_size; }
  double half_extent_y() const { return 0.5 * v * cell_size; }
  // Egocentric (x, y) of a cell center.
  Eigen::Vector2d cell_center(int cu, int cv) const;
};

/// Egocentric U x V grid of pooled features. Built fresh at every step.
struct MetricMap {
  MapSpec spec;
  int feature_dim = 0;
  std::vector<double> features;        // U*V*D
  std::vector<int> counts;             // U*V
  std::vector<std::uint8_t> observed;  // U*V
  std::vector<SemanticBits> semantics; // U*V
  std::vector<std::uint8_t> navigable; // U*V
  std::vector<std::uint8_t> masked;    // U*V, set only by cell masking
  std::vector<std::vector<NodeId>> cell_nodes;  // U*V

  MetricMap() = default;
  MetricMap(const MapSpec& s, int dim);

  std::span<const double> feature(int cu, int cv) const {
    return {features.data() + spec.index(cu, cv) * feature_dim,
            static_cast<std::size_t>(feature_dim)};
  }
  std::span<double> feature(int cu, int cv) {
    return {features.data() + spec.index(cu, cv) * feature_dim,
            static_cast<std::size_t>(feature_dim)};
  }
  std::size_t observed_count() const;
};

/// Inverse projection: one point per cell with depth in (0, max_range].
/// `semantics`, when non-empty, carries one bitset per cell.
PointCloud lift(const FeatureGrid& features, const DepthGrid& depths,
                const CameraIntrinsics& intr, const Pose& pose,
                std::span<const SemanticBits> semantics = {});

PointCloud transform_pointcloud(const PointCloud& pc, const Pose& t);

/// Average-pools points (egocentric frame) into the grid; points outside
/// the extent or height band are dropped.
MetricMap splat(const PointCloud& pc, const MapSpec& spec);

/// Cell containing egocentric (x, y), or false if outside the extent.
bool point_to_cell(const MapSpec& spec, double x, double y, int& cu, int& cv);

}  // namespace hnav
