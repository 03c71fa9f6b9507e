#include "border_forge/planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "border_forge/error.hpp"

namespace border_forge {

Costmap::Costmap(const OccupancyGridMap& source)
    : geometry_(source.width(), source.height(), source.resolution(), source.origin()),
      costs_(source.cell_count(), kBaseCost) {
  geometry_.set_thresholds(source.free_thresh(), source.occupied_thresh());
}

Costmap build_costmap(const OccupancyGridMap& map, double inflation_radius) {
  if (!(inflation_radius >= 0.0) || !std::isfinite(inflation_radius)) {
    throw Error(ErrorCode::kInvalidArgument, "inflation radius must be non-negative");
  }
  Costmap costmap(map);
  const double res = map.resolution();
  const int window = static_cast<int>(std::ceil(inflation_radius / res));

  std::vector<CellIndex> lethal;
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      if (!map.is_traversable({col, row})) lethal.push_back({col, row});
    }
  }

  // Distance to the nearest lethal center, in meters, within the window.
  std::vector<double> nearest(map.cell_count(), std::numeric_limits<double>::infinity());
  const auto idx = [&](CellIndex c) {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(map.width()) +
           static_cast<std::size_t>(c.col);
  };
  for (const CellIndex& l : lethal) {
    for (int dr = -window; dr <= window; ++dr) {
      for (int dc = -window; dc <= window; ++dc) {
        const CellIndex c{l.col + dc, l.row + dr};
        if (!map.in_bounds(c)) continue;
        const double d = res * std::hypot(static_cast<double>(dc), static_cast<double>(dr));
        nearest[idx(c)] = std::min(nearest[idx(c)], d);
      }
    }
  }

  for (const CellIndex& l : lethal) costmap.set_cost(l, Costmap::kLethal);
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const CellIndex c{col, row};
      if (costmap.is_lethal(c)) continue;
      const double d = nearest[idx(c)];
      if (d > inflation_radius) continue;
      double inflated = Costmap::kInscribedCost;
      if (inflation_radius > res) {
        inflated = Costmap::kInscribedCost * (inflation_radius - d) / (inflation_radius - res);
      }
      inflated = std::clamp(inflated, 0.0, Costmap::kInscribedCost);
      costmap.set_cost(c, std::max(Costmap::kBaseCost, inflated));
    }
  }
  return costmap;
}

namespace {

struct OpenEntry {
  double f;
  int row;
  int col;

  // Min-heap ordering: smallest f first, then lower row, then lower col.
  bool operator>(const OpenEntry& other) const {
    return std::tie(f, row, col) > std::tie(other.f, other.row, other.col);
  }
};

}  // namespace

Path plan_path(const Costmap& costmap, WorldPoint start, WorldPoint goal) {
  const OccupancyGridMap& grid = costmap.geometry();
  const CellIndex start_cell = world_to_cell(grid, start);
  const CellIndex goal_cell = world_to_cell(grid, goal);
  if (costmap.is_lethal(start_cell)) throw Error(ErrorCode::kLethalEndpoint, "start lies on a lethal cell");
  if (costmap.is_lethal(goal_cell)) throw Error(ErrorCode::kLethalEndpoint, "goal lies on a lethal cell");

  const double res = grid.resolution();
  const int width = grid.width();
  const std::size_t n = grid.cell_count();
  const auto idx = [width](CellIndex c) {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.col);
  };
  // Every step costs at least length * (1 + base cost).
  const double min_factor = 1.0 + Costmap::kBaseCost;
  const auto heuristic = [&](CellIndex c) {
    const double dx = std::abs(c.col - goal_cell.col);
    const double dy = std::abs(c.row - goal_cell.row);
    const double octile = std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy);
    return octile * res * min_factor;
  };

  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  std::vector<char> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;

  g[idx(start_cell)] = 0.0;
  open.push({heuristic(start_cell), start_cell.row, start_cell.col});
  constexpr int kSteps[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

  bool reached = false;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const CellIndex c{top.col, top.row};
    const std::size_t ci = idx(c);
    if (closed[ci]) continue;
    closed[ci] = 1;
    if (c == goal_cell) {
      reached = true;
      break;
    }
    for (const auto& step : kSteps) {
      const CellIndex next{c.col + step[0], c.row + step[1]};
      if (!grid.in_bounds(next) || costmap.is_lethal(next)) continue;
      const bool diagonal = step[0] != 0 && step[1] != 0;
      if (diagonal && (costmap.is_lethal({c.col + step[0], c.row}) || costmap.is_lethal({c.col, c.row + step[1]}))) {
        continue;
      }
      const std::size_t ni = idx(next);
      if (closed[ni]) continue;
      const double step_length = diagonal ? res * std::sqrt(2.0) : res;
      const double candidate = g[ci] + step_length * (1.0 + costmap.cost(next));
      if (candidate < g[ni]) {
        g[ni] = candidate;
        parent[ni] = ci;
        open.push({candidate + heuristic(next), next.row, next.col});
      }
    }
  }
  if (!reached) throw Error(ErrorCode::kNoPath, "no path between start and goal");

  Path path;
  path.cost = g[idx(goal_cell)];
  for (std::size_t i = idx(goal_cell); i != n; i = parent[i]) {
    path.cells.push_back({static_cast<int>(i % static_cast<std::size_t>(width)),
                          static_cast<int>(i / static_cast<std::size_t>(width))});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t k = 0; k < path.cells.size(); ++k) {
    path.points.push_back(cell_to_world(grid, path.cells[k]));
    if (k > 0) {
      const bool diagonal = path.cells[k].col != path.cells[k - 1].col && path.cells[k].row != path.cells[k - 1].row;
      path.length += diagonal ? res * std::sqrt(2.0) : res;
    }
  }
  return path;
}

bool path_crosses_region(const Path& path, const CellMask& region) {
  return std::any_of(path.cells.begin(), path.cells.end(),
                     [&](const CellIndex& c) { return region.contains(c); });
}

}  // namespace border_forge
