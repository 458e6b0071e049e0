#include "dynmap/nav_goal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "dynmap/errors.hpp"

namespace dynmap {

void NavGoalParams::validate() const {
  for (double v : {robot_radius, clearance, alpha, window_half_width}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("nav-goal parameters must be non-negative");
  }
  if (window_half_width < robot_radius) {
    throw ParameterError("window_half_width must be >= robot_radius");
  }
  if (neighborhood_radius && *neighborhood_radius < 0) {
    throw ParameterError("neighborhood_radius must be non-negative");
  }
}

int NavGoalParams::neighborhood_cells(double resolution) const {
  if (neighborhood_radius) return *neighborhood_radius;
  return static_cast<int>(std::ceil(robot_radius / resolution - 1e-9));
}

std::array<Eigen::Vector2d, 4> candidate_points(const FurnitureInstance& instance,
                                                const NavGoalParams& params) {
  params.validate();
  const Eigen::Matrix2d rot = rotation2d(instance.pose.theta);
  const double offset = params.robot_radius + params.clearance;
  const double hw = 0.5 * instance.dims.x() + offset;
  const double hd = 0.5 * instance.dims.y() + offset;
  const Eigen::Vector2d c = instance.pose.position();
  return {c + rot * Eigen::Vector2d(hw, 0.0), c + rot * Eigen::Vector2d(-hw, 0.0),
          c + rot * Eigen::Vector2d(0.0, hd), c + rot * Eigen::Vector2d(0.0, -hd)};
}

Eigen::Vector2d select_candidate(std::span<const Eigen::Vector2d, 4> points, const Pose2D& robot) {
  const Eigen::Vector2d r = robot.position();
  std::size_t best = 0;
  double best_dist = (points[0] - r).norm();
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = (points[i] - r).norm();
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return points[best];
}

namespace {

struct Query {
  Eigen::Vector2d candidate;
  int nr = 0;
};

Query prepare(const GridMap& map, const RiskField& risk, const FurnitureInstance& target,
              const Pose2D& robot, const NavGoalParams& params) {
  params.validate();
  if (!(map.geometry() == risk.geometry())) {
    throw ParameterError("risk field geometry differs from the map");
  }
  const auto points = candidate_points(target, params);
  return {select_candidate(points, robot), params.neighborhood_cells(map.resolution())};
}

bool in_window(const Eigen::Vector2d& center, const Eigen::Vector2d& candidate, double half_width) {
  return std::abs(center.x() - candidate.x()) <= half_width &&
         std::abs(center.y() - candidate.y()) <= half_width;
}

bool admissible(const RiskField& risk, CellIndex c, const Eigen::Vector2d& center,
                std::span<const FurnitureInstance> obstacles) {
  if (risk.at(c) >= kLethalRisk) return false;
  for (const auto& inst : obstacles) {
    if (footprint_contains(inst.box(), center)) return false;
  }
  return true;
}

std::int64_t weighted_risk(const RiskField& risk, CellIndex c, const Eigen::Vector2d& candidate,
                           double alpha) {
  const double dist = (cell_to_world(risk.geometry(), c) - candidate).norm();
  return risk.at(c) + std::llround(alpha * dist);
}

// Orders (cost, distance, row, col); true when a beats b.
bool better(std::int64_t cost_a, double dist_a, CellIndex a, std::int64_t cost_b, double dist_b,
            CellIndex b) {
  return std::tie(cost_a, dist_a, a.row, a.col) < std::tie(cost_b, dist_b, b.row, b.col);
}

NavGoal finish(const GridGeometry& g, CellIndex cell, std::int64_t cost,
               const Eigen::Vector2d& candidate, const FurnitureInstance& target) {
  const Eigen::Vector2d center = cell_to_world(g, cell);
  const Eigen::Vector2d to_target = target.pose.position() - center;
  NavGoal goal;
  goal.cell = cell;
  goal.pose = Pose2D(center.x(), center.y(), std::atan2(to_target.y(), to_target.x()));
  goal.cost = cost;
  goal.candidate = candidate;
  return goal;
}

}  // namespace

NavGoal select_goal(const GridMap& map, const RiskField& risk, const FurnitureInstance& target,
                    std::span<const FurnitureInstance> obstacles, const Pose2D& robot,
                    const NavGoalParams& params) {
  const Query q = prepare(map, risk, target, robot, params);
  const GridGeometry& g = map.geometry();
  const double res = g.resolution;
  const double hw = params.window_half_width;

  // Cell range whose centres may fall in the window; one cell of slack on each
  // side, the exact test is in_window below.
  const Eigen::Vector2d lo = (q.candidate.array() - hw - g.origin.array()) / res - 0.5;
  const Eigen::Vector2d hi = (q.candidate.array() + hw - g.origin.array()) / res - 0.5;
  const int col0 = std::max(0, static_cast<int>(std::floor(lo.x())) - 1);
  const int row0 = std::max(0, static_cast<int>(std::floor(lo.y())) - 1);
  const int col1 = std::min(g.width - 1, static_cast<int>(std::ceil(hi.x())) + 1);
  const int row1 = std::min(g.height - 1, static_cast<int>(std::ceil(hi.y())) + 1);
  if (col0 > col1 || row0 > row1) throw NoGoalError("candidate window lies outside the map");

  // Weighted risk over the window grown by the neighbourhood radius, then a
  // summed-area table for O(1) neighbourhood sums.
  const int ecol0 = std::max(0, col0 - q.nr);
  const int erow0 = std::max(0, row0 - q.nr);
  const int ecol1 = std::min(g.width - 1, col1 + q.nr);
  const int erow1 = std::min(g.height - 1, row1 + q.nr);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weighted(
      erow1 - erow0 + 1, ecol1 - ecol0 + 1);
  for (int row = erow0; row <= erow1; ++row) {
    for (int col = ecol0; col <= ecol1; ++col) {
      weighted(row - erow0, col - ecol0) = weighted_risk(risk, {col, row}, q.candidate, params.alpha);
    }
  }
  const SummedAreaTable<std::int64_t> sat(weighted);

  bool found = false;
  CellIndex best_cell;
  std::int64_t best_cost = 0;
  double best_dist = 0.0;
  for (int row = row0; row <= row1; ++row) {
    for (int col = col0; col <= col1; ++col) {
      const CellIndex c{col, row};
      const Eigen::Vector2d center = cell_to_world(g, c);
      if (!in_window(center, q.candidate, hw) || !admissible(risk, c, center, obstacles)) continue;
      const std::int64_t cost = sat.window_sum(row - erow0, col - ecol0, q.nr);
      const double dist = (center - q.candidate).norm();
      if (!found || better(cost, dist, c, best_cost, best_dist, best_cell)) {
        found = true;
        best_cell = c;
        best_cost = cost;
        best_dist = dist;
      }
    }
  }
  if (!found) throw NoGoalError("no admissible cell near '" + target.id + "'");
  return finish(g, best_cell, best_cost, q.candidate, target);
}

NavGoal select_goal(const GridMap& map, const RiskField& risk, const FurnitureLayer& layer,
                    const std::string& furniture_id, const Pose2D& robot,
                    const NavGoalParams& params) {
  const FurnitureInstance& target = layer.get(furniture_id);
  const auto all = layer.list();
  return select_goal(map, risk, target, all, robot, params);
}

NavGoal brute_force_goal(const GridMap& map, const RiskField& risk,
                         const FurnitureInstance& target,
                         std::span<const FurnitureInstance> obstacles, const Pose2D& robot,
                         const NavGoalParams& params) {
  const Query q = prepare(map, risk, target, robot, params);
  const GridGeometry& g = map.geometry();

  bool found = false;
  CellIndex best_cell;
  std::int64_t best_cost = 0;
  double best_dist = 0.0;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      const CellIndex c{col, row};
      const Eigen::Vector2d center = cell_to_world(g, c);
      if (!in_window(center, q.candidate, params.window_half_width)) continue;
      if (!admissible(risk, c, center, obstacles)) continue;
      std::int64_t cost = 0;
      for (int dr = -q.nr; dr <= q.nr; ++dr) {
        for (int dc = -q.nr; dc <= q.nr; ++dc) {
          const CellIndex n{col + dc, row + dr};
          if (g.contains(n)) cost += weighted_risk(risk, n, q.candidate, params.alpha);
        }
      }
      const double dist = (center - q.candidate).norm();
      if (!found || better(cost, dist, c, best_cost, best_dist, best_cell)) {
        found = true;
        best_cell = c;
        best_cost = cost;
        best_dist = dist;
      }
    }
  }
  if (!found) throw NoGoalError("no admissible cell near '" + target.id + "'");
  return finish(g, best_cell, best_cost, q.candidate, target);
}

}  // namespace dynmap
