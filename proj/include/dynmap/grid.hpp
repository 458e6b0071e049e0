#pragma once

#include <Eigen/Core>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynmap/summed_area_table.hpp"

namespace dynmap {

enum class Cell : std::uint8_t { Free, Occupied, Unknown };

inline constexpr int kLethalRisk = 100;

struct CellIndex {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Angle wrapped into (-pi, pi].
double normalize_angle(double theta);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  Eigen::Vector2d position() const { return {x, y}; }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

// Shared raster geometry of a GridMap and the RiskField derived from it.
struct GridGeometry {
  double resolution = 0.05;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  int width = 1;
  int height = 1;

  bool contains(CellIndex c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width && c.row < height;
  }
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(c.col);
  }
  std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.resolution == b.resolution && a.origin == b.origin && a.width == b.width &&
           a.height == b.height;
  }
};

// Throws BoundsError when p lies outside the raster's world extent.
CellIndex world_to_cell(const GridGeometry& geometry, const Eigen::Vector2d& p);
// Centre of the cell. Throws BoundsError for out-of-range indices.
Eigen::Vector2d cell_to_world(const GridGeometry& geometry, CellIndex c);

class GridMap {
 public:
  GridMap(double resolution, const Eigen::Vector2d& origin, int width, int height,
          Cell fill = Cell::Free);
  GridMap(const GridGeometry& geometry, std::vector<Cell> cells);

  const GridGeometry& geometry() const { return geometry_; }
  double resolution() const { return geometry_.resolution; }
  const Eigen::Vector2d& origin() const { return geometry_.origin; }
  int width() const { return geometry_.width; }
  int height() const { return geometry_.height; }
  bool contains(CellIndex c) const { return geometry_.contains(c); }

  Cell at(CellIndex c) const;
  void set(CellIndex c, Cell state);
  std::span<const Cell> cells() const { return cells_; }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  GridGeometry geometry_;
  std::vector<Cell> cells_;
};

// Integer risk per cell over a GridMap's geometry, with a summed-area table
// built once at construction for constant-time window sums.
class RiskField {
 public:
  RiskField(const GridGeometry& geometry, std::vector<int> risk);

  const GridGeometry& geometry() const { return geometry_; }
  int width() const { return geometry_.width; }
  int height() const { return geometry_.height; }

  int at(CellIndex c) const;
  std::span<const int> values() const { return risk_; }
  const SummedAreaTable<std::int64_t>& integral() const { return integral_; }

  friend bool operator==(const RiskField& a, const RiskField& b) {
    return a.geometry_ == b.geometry_ && a.risk_ == b.risk_;
  }

 private:
  GridGeometry geometry_;
  std::vector<int> risk_;
  SummedAreaTable<std::int64_t> integral_;
};

// Cells whose centre is within `radius` metres of an OCCUPIED or UNKNOWN cell
// centre get kLethalRisk; everything else 0.
RiskField inflate(const GridMap& map, double radius);

// Sum of risk over the clipped (2r+1)^2 window centred on c.
std::int64_t neighborhood_cost(const RiskField& field, CellIndex c, int r);

// Grid text format: header `gridmap v1 <w> <h> <res> <ox> <oy>` then one line
// of glyphs per row, row 0 first. '.' free, '#' occupied, '?' unknown.
std::string save_grid(const GridMap& map);
GridMap load_grid(std::string_view document);

char cell_glyph(Cell c);

}  // namespace dynmap
