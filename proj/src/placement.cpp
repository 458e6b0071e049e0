#include "dynmap/placement.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dynmap/errors.hpp"
#include "dynmap/geometry.hpp"
#include "dynmap/text.hpp"

namespace dynmap {

void RansacParams::validate() const {
  if (iterations < 1) throw ParameterError("RANSAC needs at least one iteration");
  if (!(inlier_eps > 0.0)) throw ParameterError("inlier_eps must be positive");
  if (!(min_inlier_fraction >= 0.0 && min_inlier_fraction <= 1.0)) {
    throw ParameterError("min_inlier_fraction must lie in [0, 1]");
  }
}

namespace {

Plane oriented(Eigen::Vector3d normal, const Eigen::Vector3d& through) {
  normal.normalize();
  if (normal.z() < 0.0) normal = -normal;
  return {normal, -normal.dot(through)};
}

std::vector<std::size_t> collect_inliers(const PointCloud& cloud, const Plane& plane, double eps) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (std::abs(plane.signed_distance(cloud[i])) <= eps) out.push_back(i);
  }
  return out;
}

}  // namespace

Plane fit_plane_least_squares(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  if (indices.size() < 3) throw FitError("least-squares plane needs at least 3 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (auto i : indices) centroid += cloud[i];
  centroid /= static_cast<double>(indices.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (auto i : indices) {
    const Eigen::Vector3d q = cloud[i] - centroid;
    cov.noalias() += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) throw FitError("covariance eigen-decomposition failed");
  // Eigenvalues come sorted ascending; the first eigenvector is the normal.
  return oriented(solver.eigenvectors().col(0), centroid);
}

PlaneFit ransac_plane(const PointCloud& cloud, const RansacParams& params) {
  params.validate();
  if (cloud.size() < 3) throw FitError("plane fit needs at least 3 points");
  for (const auto& p : cloud) {
    if (!p.allFinite()) throw FitError("point cloud contains non-finite coordinates");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);

  bool have = false;
  Plane best;
  std::size_t best_count = 0;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Eigen::Vector3d e1 = cloud[b] - cloud[a];
    const Eigen::Vector3d e2 = cloud[c] - cloud[a];
    const Eigen::Vector3d n = e1.cross(e2);
    if (n.norm() <= 1e-12 * std::max(1.0, e1.norm() * e2.norm())) continue;
    const Plane h = oriented(n, cloud[a]);
    std::size_t count = 0;
    for (const auto& p : cloud) {
      if (std::abs(h.signed_distance(p)) <= params.inlier_eps) ++count;
    }
    if (!have || count > best_count) {
      have = true;
      best = h;
      best_count = count;
    }
  }
  if (!have) throw FitError("every RANSAC sample was degenerate");
  const double fraction = static_cast<double>(best_count) / static_cast<double>(cloud.size());
  if (fraction < params.min_inlier_fraction) {
    throw InsufficientSupportError("best plane supports only " + std::to_string(best_count) +
                                   " of " + std::to_string(cloud.size()) + " points");
  }

  PlaneFit fit;
  fit.hypothesis = best;
  fit.inliers = collect_inliers(cloud, best, params.inlier_eps);
  fit.plane = fit_plane_least_squares(cloud, fit.inliers);
  return fit;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> plane_basis(const Plane& plane) {
  const Eigen::Vector3d& n = plane.normal;
  // Seed with the world axis least aligned with the normal.
  Eigen::Index axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  const Eigen::Vector3d seed = Eigen::Vector3d::Unit(axis);
  Eigen::Vector3d u = (seed - seed.dot(n) * n).normalized();
  if (std::abs(n.z()) > 0.5) {
    // Near-horizontal surfaces: align u with world x for readable output.
    const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
    u = (x - x.dot(n) * n).normalized();
  }
  const Eigen::Vector3d v = n.cross(u);
  return {u, v};
}

std::vector<double> distance_transform_1d(const std::vector<double>& f) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  if (n == 0) return d;
  std::vector<std::size_t> v(n);
  std::vector<double> z(n + 1);
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto sq = [](double x) { return x * x; };
  for (std::size_t q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const double vq = static_cast<double>(v[k]);
      const double qq = static_cast<double>(q);
      s = ((f[q] + sq(qq)) - (f[v[k]] + sq(vq))) / (2.0 * qq - 2.0 * vq);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    d[q] = sq(static_cast<double>(q) - static_cast<double>(v[k])) + f[v[k]];
  }
  return d;
}

Placement find_placement(const PointCloud& cloud, const Plane& plane,
                         const std::vector<std::size_t>& inliers, double object_radius,
                         const PlacementParams& params) {
  if (!(object_radius > 0.0)) throw ParameterError("object radius must be positive");
  if (!(params.grid_pitch > 0.0)) throw ParameterError("grid pitch must be positive");
  const auto [u, v] = plane_basis(plane);
  const Eigen::Vector3d origin = -plane.offset * plane.normal;
  auto to_plane = [&](const Eigen::Vector3d& p) {
    const Eigen::Vector3d q = p - origin;
    return Eigen::Vector2d(q.dot(u), q.dot(v));
  };

  std::vector<Eigen::Vector2d> projected;
  projected.reserve(inliers.size());
  std::vector<bool> is_inlier(cloud.size(), false);
  for (auto i : inliers) {
    if (i >= cloud.size()) throw ParameterError("inlier index out of range");
    is_inlier[i] = true;
    projected.push_back(to_plane(cloud[i]));
  }
  const auto hull = convex_hull(std::move(projected));
  if (hull.size() < 3) throw NoSpaceError("supporting surface has no area");

  Eigen::Vector2d lo = hull.front();
  Eigen::Vector2d hi = hull.front();
  for (const auto& p : hull) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double pitch = params.grid_pitch;
  const int cols = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / pitch)));
  const int rows = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / pitch)));
  const auto idx = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  const auto center_of = [&](int r, int c) {
    return Eigen::Vector2d(lo.x() + (c + 0.5) * pitch, lo.y() + (r + 0.5) * pitch);
  };

  std::vector<bool> occupied(static_cast<std::size_t>(rows) * cols, false);
  bool any_occupied = false;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (is_inlier[i]) continue;
    const double h = plane.signed_distance(cloud[i]);
    if (!(h > 0.0 && h <= params.occupancy_band)) continue;
    const Eigen::Vector2d q = to_plane(cloud[i]);
    const int c = static_cast<int>(std::floor((q.x() - lo.x()) / pitch));
    const int r = static_cast<int>(std::floor((q.y() - lo.y()) / pitch));
    if (r < 0 || c < 0 || r >= rows || c >= cols) continue;
    occupied[idx(r, c)] = true;
    any_occupied = true;
  }

  // Squared distance (in cells) to the nearest occupied cell, separable EDT.
  const double far = 1e20;
  std::vector<double> sqdist(occupied.size(), far);
  if (any_occupied) {
    std::vector<double> column(static_cast<std::size_t>(rows));
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) column[r] = occupied[idx(r, c)] ? 0.0 : far;
      const auto d = distance_transform_1d(column);
      for (int r = 0; r < rows; ++r) sqdist[idx(r, c)] = d[r];
    }
    std::vector<double> row(static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) row[c] = sqdist[idx(r, c)];
      const auto d = distance_transform_1d(row);
      for (int c = 0; c < cols; ++c) sqdist[idx(r, c)] = d[c];
    }
  }

  const double required = object_radius + params.margin;
  bool found = false;
  double best_clearance = 0.0;
  Eigen::Vector2d best_point = Eigen::Vector2d::Zero();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (occupied[idx(r, c)]) continue;
      const Eigen::Vector2d p = center_of(r, c);
      double edge = std::numeric_limits<double>::infinity();
      bool inside = true;
      for (std::size_t e = 0; e < hull.size(); ++e) {
        const Eigen::Vector2d& a = hull[e];
        const Eigen::Vector2d& b = hull[(e + 1) % hull.size()];
        const Eigen::Vector2d ab = b - a;
        const Eigen::Vector2d ap = p - a;
        if (ab.x() * ap.y() - ab.y() * ap.x() < 0.0) {
          inside = false;
          break;
        }
        edge = std::min(edge, point_segment_distance(p, a, b));
      }
      if (!inside) continue;
      const double obstacle =
          any_occupied ? std::sqrt(sqdist[idx(r, c)]) * pitch : std::numeric_limits<double>::infinity();
      const double clearance = std::min(edge, obstacle);
      if (clearance < required) continue;
      if (!found || clearance > best_clearance) {
        found = true;
        best_clearance = clearance;
        best_point = p;
      }
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no spot with clearance >= " << required << " m";
    throw NoSpaceError(msg.str());
  }
  return {origin + best_point.x() * u + best_point.y() * v, best_clearance};
}

PointCloud parse_cloud(std::string_view document) {
  PointCloud cloud;
  int line_no = 0;
  for (const auto& raw : text::split(document, '\n')) {
    ++line_no;
    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string tok[4];
    int n = 0;
    while (n < 4 && in >> tok[n]) ++n;
    if (n != 3) throw ParseError("expected 'x y z'", line_no);
    try {
      cloud.emplace_back(text::parse_double(tok[0]), text::parse_double(tok[1]),
                         text::parse_double(tok[2]));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!cloud.back().allFinite()) throw ParseError("non-finite coordinate", line_no);
  }
  return cloud;
}

}  // namespace dynmap
