#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "dynmap/furniture.hpp"
#include "dynmap/grid.hpp"

namespace dynmap {

struct NavGoalParams {
  double robot_radius = 0.22;      // m; also the inflation radius
  double clearance = 0.2;          // m beyond the robot radius
  double alpha = 10.0;             // risk units per metre from the candidate point
  double window_half_width = 1.5;  // m
  std::optional<int> neighborhood_radius;  // cells; ceil(robot_radius / resolution) when unset

  void validate() const;
  int neighborhood_cells(double resolution) const;
};

struct NavGoal {
  CellIndex cell;
  Pose2D pose;  // cell centre, facing the furniture centroid
  std::int64_t cost = 0;
  Eigen::Vector2d candidate = Eigen::Vector2d::Zero();
};

enum class Side { East = 0, West = 1, North = 2, South = 3 };

// Edge midpoints of the plan footprint pushed outward by robot_radius +
// clearance, ordered E, W, N, S in the furniture frame.
std::array<Eigen::Vector2d, 4> candidate_points(const FurnitureInstance& instance,
                                                const NavGoalParams& params);

// Closest point to the robot; ties keep the earlier point.
Eigen::Vector2d select_candidate(std::span<const Eigen::Vector2d, 4> points, const Pose2D& robot);

// Lowest-cost admissible cell around the approach point. Each cell's cost is
// the window sum of risk + round(alpha * distance-to-candidate); admissible
// cells have risk < 100 and lie outside every footprint in `obstacles`.
// Throws NoGoalError when nothing qualifies.
NavGoal select_goal(const GridMap& map, const RiskField& risk, const FurnitureInstance& target,
                    std::span<const FurnitureInstance> obstacles, const Pose2D& robot,
                    const NavGoalParams& params);
NavGoal select_goal(const GridMap& map, const RiskField& risk, const FurnitureLayer& layer,
                    const std::string& furniture_id, const Pose2D& robot,
                    const NavGoalParams& params);

// Plain nested-loop reference with the same contract as select_goal.
NavGoal brute_force_goal(const GridMap& map, const RiskField& risk,
                         const FurnitureInstance& target,
                         std::span<const FurnitureInstance> obstacles, const Pose2D& robot,
                         const NavGoalParams& params);

}  // namespace dynmap
