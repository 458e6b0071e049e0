#include "dynmap/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

namespace dynmap {

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Proper or touching intersection of segments p1p2 and q1q2, if any.
bool segment_intersection(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                          const Eigen::Vector2d& q1, const Eigen::Vector2d& q2,
                          Eigen::Vector2d& out) {
  const Eigen::Vector2d r = p2 - p1;
  const Eigen::Vector2d s = q2 - q1;
  const double denom = r.x() * s.y() - r.y() * s.x();
  if (std::abs(denom) < 1e-15) return false;
  const Eigen::Vector2d qp = q1 - p1;
  const double t = (qp.x() * s.y() - qp.y() * s.x()) / denom;
  const double u = (qp.x() * r.y() - qp.y() * r.x()) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  out = p1 + t * r;
  return true;
}

}  // namespace

Eigen::Matrix2d rotation2d(double theta) { return Eigen::Rotation2Dd(theta).toRotationMatrix(); }

std::array<Eigen::Vector2d, 4> footprint_corners(const OrientedBox3& box) {
  const Eigen::Matrix2d rot = rotation2d(box.yaw);
  const Eigen::Vector2d c = box.center.head<2>();
  const double hw = 0.5 * box.dims.x();
  const double hd = 0.5 * box.dims.y();
  return {c + rot * Eigen::Vector2d(hw, -hd), c + rot * Eigen::Vector2d(hw, hd),
          c + rot * Eigen::Vector2d(-hw, hd), c + rot * Eigen::Vector2d(-hw, -hd)};
}

bool footprint_contains(const OrientedBox3& box, const Eigen::Vector2d& p, double slack) {
  const Eigen::Vector2d local = rotation2d(-box.yaw) * (p - box.center.head<2>());
  return std::abs(local.x()) <= 0.5 * box.dims.x() + slack &&
         std::abs(local.y()) <= 0.5 * box.dims.y() + slack;
}

double polygon_area(std::span<const Eigen::Vector2d> polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * std::abs(twice);
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Eigen::Vector2d> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

// The intersection of two convex quadrilaterals is the convex hull of the
// corners of each that lie inside the other plus all edge crossings.
double footprint_intersection_area(const OrientedBox3& a, const OrientedBox3& b) {
  const auto ca = footprint_corners(a);
  const auto cb = footprint_corners(b);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(24);
  for (const auto& p : ca) {
    if (footprint_contains(b, p, 1e-12)) pts.push_back(p);
  }
  for (const auto& p : cb) {
    if (footprint_contains(a, p, 1e-12)) pts.push_back(p);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      Eigen::Vector2d x;
      if (segment_intersection(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4], x)) {
        pts.push_back(x);
      }
    }
  }
  const auto hull = convex_hull(std::move(pts));
  return polygon_area(hull);
}

double iou_3d(const OrientedBox3& a, const OrientedBox3& b) {
  const double a_lo = a.center.z() - 0.5 * a.dims.z();
  const double a_hi = a.center.z() + 0.5 * a.dims.z();
  const double b_lo = b.center.z() - 0.5 * b.dims.z();
  const double b_hi = b.center.z() + 0.5 * b.dims.z();
  const double vertical = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
  if (vertical <= 0.0) return 0.0;
  const double area = footprint_intersection_area(a, b);
  if (area <= 0.0) return 0.0;
  const double inter = area * vertical;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace dynmap
