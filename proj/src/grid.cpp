#include "dynmap/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dynmap/errors.hpp"
#include "dynmap/text.hpp"

namespace dynmap {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw ParameterError("non-finite angle");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(theta, two_pi);
  if (wrapped > std::numbers::pi) wrapped -= two_pi;
  if (wrapped <= -std::numbers::pi) wrapped += two_pi;
  return wrapped;
}

namespace {

void validate(const GridGeometry& g) {
  if (!(g.resolution > 0.0) || !std::isfinite(g.resolution)) {
    throw ParameterError("grid resolution must be positive");
  }
  if (g.width < 1 || g.height < 1) throw ParameterError("grid dimensions must be >= 1");
  if (!g.origin.allFinite()) throw ParameterError("grid origin must be finite");
}

}  // namespace

CellIndex world_to_cell(const GridGeometry& geometry, const Eigen::Vector2d& p) {
  const Eigen::Vector2d rel = (p - geometry.origin) / geometry.resolution;
  if (!rel.allFinite()) throw BoundsError("point is not finite");
  const double col = std::floor(rel.x());
  const double row = std::floor(rel.y());
  if (col < 0 || row < 0 || col >= geometry.width || row >= geometry.height) {
    std::ostringstream msg;
    msg << "point (" << p.x() << ", " << p.y() << ") is outside the map";
    throw BoundsError(msg.str());
  }
  return {static_cast<int>(col), static_cast<int>(row)};
}

Eigen::Vector2d cell_to_world(const GridGeometry& geometry, CellIndex c) {
  if (!geometry.contains(c)) {
    throw BoundsError("cell (" + std::to_string(c.col) + ", " + std::to_string(c.row) +
                      ") is outside the map");
  }
  return geometry.origin + geometry.resolution * Eigen::Vector2d(c.col + 0.5, c.row + 0.5);
}

GridMap::GridMap(double resolution, const Eigen::Vector2d& origin, int width, int height,
                 Cell fill)
    : geometry_{resolution, origin, width, height} {
  validate(geometry_);
  cells_.assign(geometry_.size(), fill);
}

GridMap::GridMap(const GridGeometry& geometry, std::vector<Cell> cells)
    : geometry_(geometry), cells_(std::move(cells)) {
  validate(geometry_);
  if (cells_.size() != geometry_.size()) {
    throw ParameterError("cell count does not match width x height");
  }
}

Cell GridMap::at(CellIndex c) const {
  if (!contains(c)) throw BoundsError("cell index out of range");
  return cells_[geometry_.index(c)];
}

void GridMap::set(CellIndex c, Cell state) {
  if (!contains(c)) throw BoundsError("cell index out of range");
  cells_[geometry_.index(c)] = state;
}

RiskField::RiskField(const GridGeometry& geometry, std::vector<int> risk)
    : geometry_(geometry), risk_(std::move(risk)) {
  validate(geometry_);
  if (risk_.size() != geometry_.size()) {
    throw ParameterError("risk count does not match width x height");
  }
  for (int v : risk_) {
    if (v < 0) throw ParameterError("risk must be non-negative");
  }
  using RowMajorInt = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajorInt> raster(risk_.data(), geometry_.height, geometry_.width);
  integral_ = SummedAreaTable<std::int64_t>(raster);
}

int RiskField::at(CellIndex c) const {
  if (!geometry_.contains(c)) throw BoundsError("cell index out of range");
  return risk_[geometry_.index(c)];
}

RiskField inflate(const GridMap& map, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ParameterError("inflation radius must be non-negative");
  }
  const GridGeometry& g = map.geometry();
  // Compare in squared cell units; the slack absorbs radius/resolution
  // round-off so that radius = k * resolution includes distance k.
  const double r_cells = radius / g.resolution;
  const double limit = r_cells * r_cells * (1.0 + 1e-9) + 1e-12;
  const int reach = static_cast<int>(std::floor(std::sqrt(limit)));

  std::vector<Eigen::Vector2i> disc;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      if (static_cast<double>(dx * dx + dy * dy) <= limit) disc.emplace_back(dx, dy);
    }
  }

  std::vector<int> risk(g.size(), 0);
  const auto cells = map.cells();
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      if (cells[g.index({col, row})] == Cell::Free) continue;
      for (const auto& off : disc) {
        const CellIndex n{col + off.x(), row + off.y()};
        if (g.contains(n)) risk[g.index(n)] = kLethalRisk;
      }
    }
  }
  return RiskField(g, std::move(risk));
}

std::int64_t neighborhood_cost(const RiskField& field, CellIndex c, int r) {
  if (!field.geometry().contains(c)) throw BoundsError("window centre out of range");
  if (r < 0) throw ParameterError("window radius must be non-negative");
  return field.integral().window_sum(c.row, c.col, r);
}

char cell_glyph(Cell c) {
  switch (c) {
    case Cell::Free:
      return '.';
    case Cell::Occupied:
      return '#';
    case Cell::Unknown:
      return '?';
  }
  return '?';
}

std::string save_grid(const GridMap& map) {
  const GridGeometry& g = map.geometry();
  std::string out = "gridmap v1 " + std::to_string(g.width) + " " + std::to_string(g.height) +
                    " " + text::format_double(g.resolution) + " " +
                    text::format_double(g.origin.x()) + " " + text::format_double(g.origin.y()) +
                    "\n";
  out.reserve(out.size() + g.size() + static_cast<std::size_t>(g.height));
  const auto cells = map.cells();
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) out.push_back(cell_glyph(cells[g.index({col, row})]));
    out.push_back('\n');
  }
  return out;
}

GridMap load_grid(std::string_view document) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < document.size()) {
    const auto nl = document.find('\n', start);
    if (nl == std::string_view::npos) throw ParseError("missing final newline", static_cast<int>(lines.size()) + 1);
    lines.push_back(document.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty()) throw ParseError("empty document", 1);

  const auto header = text::split(lines[0], ' ');
  if (header.size() != 7 || header[0] != "gridmap" || header[1] != "v1") {
    throw ParseError("malformed header", 1);
  }
  GridGeometry g;
  try {
    g.width = static_cast<int>(text::parse_int(header[2]));
    g.height = static_cast<int>(text::parse_int(header[3]));
    g.resolution = text::parse_double(header[4]);
    g.origin = {text::parse_double(header[5]), text::parse_double(header[6])};
  } catch (const ParseError& e) {
    throw ParseError(std::string("malformed header: ") + e.what(), 1);
  }
  if (g.width < 1 || g.height < 1 || !(g.resolution > 0.0) || !g.origin.allFinite()) {
    throw ParseError("malformed header: invalid geometry", 1);
  }
  if (lines.size() - 1 != static_cast<std::size_t>(g.height)) {
    throw ParseError("expected " + std::to_string(g.height) + " rows, found " +
                         std::to_string(lines.size() - 1),
                     static_cast<int>(lines.size()) + 1);
  }

  std::vector<Cell> cells;
  cells.reserve(g.size());
  for (int row = 0; row < g.height; ++row) {
    const int line_no = row + 2;
    const std::string_view line = lines[static_cast<std::size_t>(row) + 1];
    if (line.size() != static_cast<std::size_t>(g.width)) {
      throw ParseError("row length " + std::to_string(line.size()) + " != width " +
                           std::to_string(g.width),
                       line_no);
    }
    for (char ch : line) {
      switch (ch) {
        case '.':
          cells.push_back(Cell::Free);
          break;
        case '#':
          cells.push_back(Cell::Occupied);
          break;
        case '?':
          cells.push_back(Cell::Unknown);
          break;
        default:
          throw ParseError(std::string("unknown cell glyph '") + ch + "'", line_no);
      }
    }
  }
  return GridMap(g, std::move(cells));
}

}  // namespace dynmap
