#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

namespace dynmap {

// A box rotated about the vertical axis. `center` is the volumetric centre,
// `dims` the (w, d, h) extents along the box's local x, y, z.
struct OrientedBox3 {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dims = Eigen::Vector3d::Ones();
  double yaw = 0.0;

  double volume() const { return dims.prod(); }
};

Eigen::Matrix2d rotation2d(double theta);

// Plan-view corners, counter-clockwise, starting at local (+w/2, -d/2).
std::array<Eigen::Vector2d, 4> footprint_corners(const OrientedBox3& box);

// Closed containment test on the plan footprint, with `slack` metres of tolerance.
bool footprint_contains(const OrientedBox3& box, const Eigen::Vector2d& p, double slack = 1e-9);

double polygon_area(std::span<const Eigen::Vector2d> polygon);

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

// Area of the intersection of two plan footprints.
double footprint_intersection_area(const OrientedBox3& a, const OrientedBox3& b);

// Footprint intersection area times vertical overlap, over the union volume.
double iou_3d(const OrientedBox3& a, const OrientedBox3& b);

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b);

}  // namespace dynmap
