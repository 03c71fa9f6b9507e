// Independent reference computations for tests. Nothing here calls into the
// code paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "border_forge/gridmap.hpp"

namespace border_forge::oracle {

// Liang-Barsky test: does segment (u0,v0)-(u1,v1) touch the closed box
// [bx0,bx1] x [by0,by1]? Coordinates in cell units.
inline bool segment_touches_box(double u0, double v0, double u1, double v1, double bx0, double by0,
                                double bx1, double by1) {
  double t0 = 0.0, t1 = 1.0;
  const double du = u1 - u0, dv = v1 - v0;
  const double p[4] = {-du, du, -dv, dv};
  const double q[4] = {u0 - bx0, bx1 - u0, v0 - by0, by1 - v0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        t0 = std::max(t0, r);
      } else {
        t1 = std::min(t1, r);
      }
      if (t0 > t1) return false;
    }
  }
  return true;
}

// Brute-force supercover over every grid cell (axis-aligned map assumed).
inline std::set<CellIndex> supercover(int width, int height, double resolution, WorldPoint a, WorldPoint b) {
  std::set<CellIndex> out;
  const double u0 = a.x / resolution, v0 = a.y / resolution;
  const double u1 = b.x / resolution, v1 = b.y / resolution;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      if (segment_touches_box(u0, v0, u1, v1, col, row, col + 1.0, row + 1.0)) out.insert({col, row});
    }
  }
  return out;
}

// Even-odd rule point-in-polygon.
inline bool point_in_polygon(const std::vector<WorldPoint>& poly, WorldPoint p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const WorldPoint& a = poly[i];
    const WorldPoint& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Labels 4-connected components of cells where `open(c)` holds. Returns the
// label grid (-1 for closed cells) and the component count.
template <typename OpenFn>
std::pair<std::vector<int>, int> label_components(int width, int height, OpenFn open) {
  std::vector<int> label(static_cast<std::size_t>(width) * height, -1);
  int count = 0;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const std::size_t i = static_cast<std::size_t>(row) * width + col;
      if (label[i] != -1 || !open(CellIndex{col, row})) continue;
      std::queue<CellIndex> q;
      q.push({col, row});
      label[i] = count;
      while (!q.empty()) {
        const CellIndex c = q.front();
        q.pop();
        const CellIndex nbrs[4] = {{c.col + 1, c.row}, {c.col - 1, c.row}, {c.col, c.row + 1}, {c.col, c.row - 1}};
        for (const CellIndex& n : nbrs) {
          if (n.col < 0 || n.row < 0 || n.col >= width || n.row >= height) continue;
          const std::size_t ni = static_cast<std::size_t>(n.row) * width + n.col;
          if (label[ni] != -1 || !open(n)) continue;
          label[ni] = count;
          q.push(n);
        }
      }
      ++count;
    }
  }
  return {label, count};
}

// Plain Dijkstra over the same 8-connected, no-corner-cutting move set.
// `cost(c)` is the per-cell cost (infinity = lethal). Returns infinity when
// unreachable.
template <typename CostFn>
double dijkstra_cost(int width, int height, double resolution, CellIndex start, CellIndex goal, CostFn cost) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(width) * height, inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const auto id = [width](CellIndex c) { return static_cast<std::size_t>(c.row) * width + c.col; };
  const auto blocked = [&](CellIndex c) {
    return c.col < 0 || c.row < 0 || c.col >= width || c.row >= height || cost(c) == inf;
  };
  dist[id(start)] = 0.0;
  pq.push({0.0, id(start)});
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const CellIndex c{static_cast<int>(i % width), static_cast<int>(i / width)};
    if (c == goal) return d;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (!dr && !dc) continue;
        const CellIndex n{c.col + dc, c.row + dr};
        if (blocked(n)) continue;
        if (dr && dc && (blocked({c.col + dc, c.row}) || blocked({c.col, c.row + dr}))) continue;
        const double len = (dr && dc) ? resolution * std::sqrt(2.0) : resolution;
        const double nd = d + len * (1.0 + cost(n));
        if (nd < dist[id(n)]) {
          dist[id(n)] = nd;
          pq.push({nd, id(n)});
        }
      }
    }
  }
  return inf;
}

}  // namespace border_forge::oracle
