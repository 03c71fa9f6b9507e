#pragma once

#include <limits>
#include <vector>

#include "border_forge/gridmap.hpp"

namespace border_forge {

inline constexpr double kDefaultInflationRadius = 0.18;  // meters

// Per-cell traversal cost over a map's geometry. Lethal cells are impassable;
// everything else costs at least kBaseCost.
class Costmap {
 public:
  static constexpr double kLethal = std::numeric_limits<double>::infinity();
  static constexpr double kBaseCost = 1.0;
  static constexpr double kInscribedCost = 100.0;

  explicit Costmap(const OccupancyGridMap& source);

  const OccupancyGridMap& geometry() const { return geometry_; }
  int width() const { return geometry_.width(); }
  int height() const { return geometry_.height(); }

  double cost(CellIndex c) const { return costs_[offset(c)]; }
  bool is_lethal(CellIndex c) const { return costs_[offset(c)] == kLethal; }
  void set_cost(CellIndex c, double cost) { costs_[offset(c)] = cost; }

 private:
  std::size_t offset(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(geometry_.width()) +
           static_cast<std::size_t>(c.col);
  }

  OccupancyGridMap geometry_;
  std::vector<double> costs_;
};

// Occupied and unknown cells become lethal. Cells within `inflation_radius`
// of a lethal cell center get a cost falling linearly from 100 (adjacent) to 0
// at the radius, floored at the base cost 1.
Costmap build_costmap(const OccupancyGridMap& map, double inflation_radius = kDefaultInflationRadius);

struct Path {
  std::vector<WorldPoint> points;  // cell centers, start to goal
  std::vector<CellIndex> cells;
  double length = 0.0;             // meters
  double cost = 0.0;               // sum of step_length * (1 + cell cost)
};

// 8-connected A* with an octile heuristic. Diagonal steps may not cut a
// lethal corner. Equal f-scores expand the lower row, then lower column.
Path plan_path(const Costmap& costmap, WorldPoint start, WorldPoint goal);

// True iff some path cell lies in `region`.
bool path_crosses_region(const Path& path, const CellMask& region);

}  // namespace border_forge
