#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string_view>
#include <vector>

namespace dynmap {

using PointCloud = std::vector<Eigen::Vector3d>;

// n . p + d = 0, |n| = 1, n_z >= 0.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) + offset; }
};

struct RansacParams {
  int iterations = 200;
  double inlier_eps = 0.01;
  double min_inlier_fraction = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlaneFit {
  Plane plane;
  Plane hypothesis;  // best 3-point plane before the least-squares refit
  std::vector<std::size_t> inliers;  // ascending indices
};

// Best-of-N three-point hypotheses by inlier count (earliest wins ties), then a
// least-squares refit on the winning inlier set.
PlaneFit ransac_plane(const PointCloud& cloud, const RansacParams& params);

// Least-squares plane through the given points (smallest-eigenvalue direction
// of their covariance).
Plane fit_plane_least_squares(const PointCloud& cloud, const std::vector<std::size_t>& indices);

struct PlacementParams {
  double grid_pitch = 0.02;
  double occupancy_band = 0.30;
  double margin = 0.02;
};

struct Placement {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double clearance = 0.0;  // distance to nearest occupied cell or hull edge
};

// Largest-clearance free spot on the fitted surface. Throws NoSpaceError when
// no cell clears object_radius + margin.
Placement find_placement(const PointCloud& cloud, const Plane& plane,
                         const std::vector<std::size_t>& inliers, double object_radius,
                         const PlacementParams& params = {});

// Orthonormal in-plane axes (u, v) with u x v = n.
std::pair<Eigen::Vector3d, Eigen::Vector3d> plane_basis(const Plane& plane);

// 1D exact squared Euclidean distance transform (lower envelope of parabolas).
// Input: 0 at sites, a large value elsewhere.
std::vector<double> distance_transform_1d(const std::vector<double>& f);

// `x y z` per line.
PointCloud parse_cloud(std::string_view document);

}  // namespace dynmap
