#include "border_forge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "border_forge/error.hpp"

namespace border_forge {

std::size_t PolygonalChain::segment_count() const {
  if (points.size() < 2) return 0;
  return closed ? points.size() : points.size() - 1;
}

bool ValidationReport::has(ChainIssueKind kind) const {
  return std::any_of(issues.begin(), issues.end(),
                     [kind](const ChainIssue& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << "; ";
    out << issues[i].message;
  }
  return out.str();
}

namespace {

double cross(WorldPoint o, WorldPoint a, WorldPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(WorldPoint o, WorldPoint a, WorldPoint b) {
  const double v = cross(o, a, b);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(WorldPoint a, WorldPoint b, WorldPoint p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(WorldPoint a, WorldPoint b, WorldPoint c, WorldPoint d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

ValidationReport validate_chain(const PolygonalChain& chain) {
  ValidationReport report;
  const auto& pts = chain.points;
  const std::size_t n = pts.size();
  const std::size_t min_points = chain.closed ? 3 : 2;
  if (n < min_points) {
    report.issues.push_back({ChainIssueKind::kArity,
                             std::string(chain.closed ? "closed" : "open") + " chain needs at least " +
                                 std::to_string(min_points) + " points, got " + std::to_string(n),
                             {}});
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
      report.issues.push_back(
          {ChainIssueKind::kNonFinite, "point " + std::to_string(i) + " is not finite", {i}});
    }
  }
  if (!report.valid()) return report;

  const std::size_t segments = chain.segment_count();
  auto seg_start = [&](std::size_t s) { return pts[s]; };
  auto seg_end = [&](std::size_t s) { return pts[(s + 1) % n]; };

  bool repeated = false;
  for (std::size_t s = 0; s < segments; ++s) {
    if (seg_start(s) == seg_end(s)) {
      repeated = true;
      report.issues.push_back({ChainIssueKind::kRepeatedPoint,
                               "points " + std::to_string(s) + " and " +
                                   std::to_string((s + 1) % n) + " coincide",
                               {s, (s + 1) % n}});
    }
  }
  // Intersection tests are meaningless with zero-length segments.
  if (repeated) return report;

  for (std::size_t i = 0; i < segments; ++i) {
    for (std::size_t j = i + 1; j < segments; ++j) {
      const bool adjacent = (j == i + 1) || (chain.closed && i == 0 && j == segments - 1);
      const WorldPoint a = seg_start(i), b = seg_end(i);
      const WorldPoint c = seg_start(j), d = seg_end(j);
      bool hit = false;
      if (adjacent) {
        // Adjacent segments share one vertex; they only conflict when they
        // fold back over each other.
        const WorldPoint shared = (j == i + 1) ? b : a;
        const WorldPoint p = (j == i + 1) ? a : b;
        const WorldPoint q = (j == i + 1) ? d : c;
        if (orientation(shared, p, q) == 0) {
          const double dot = (p.x - shared.x) * (q.x - shared.x) + (p.y - shared.y) * (q.y - shared.y);
          hit = dot > 0.0;
        }
        // A triangle's three segments are pairwise adjacent; nothing else to test.
      } else {
        hit = segments_intersect(a, b, c, d);
      }
      if (hit) {
        report.issues.push_back({ChainIssueKind::kSelfIntersection,
                                 "segments " + std::to_string(i) + " and " + std::to_string(j) +
                                     " intersect",
                                 {i, j}});
      }
    }
  }
  return report;
}

void require_valid_chain(const PolygonalChain& chain) {
  const ValidationReport report = validate_chain(chain);
  if (!report.valid()) throw Error(ErrorCode::kInvalidChain, "invalid polygonal chain", report.summary());
}

BarrierMask rasterize_segment(const OccupancyGridMap& map, const LineSegment& segment) {
  if (segment.a == segment.b) {
    throw Error(ErrorCode::kInvalidSegment, "segment endpoints coincide");
  }
  for (const WorldPoint& p : {segment.a, segment.b}) {
    if (!in_extent(map, p)) {
      throw Error(ErrorCode::kOutOfBounds, "segment endpoint outside map extent",
                  "(" + format_double(p.x) + ", " + format_double(p.y) + ")");
    }
  }
  GridPoint p0 = world_to_grid(map, segment.a);
  GridPoint p1 = world_to_grid(map, segment.b);
  // Canonical order makes the output independent of endpoint order.
  if (std::tie(p1.u, p1.v) < std::tie(p0.u, p0.v)) std::swap(p0, p1);

  BarrierMask mask = map.empty_mask();
  const double du = p1.u - p0.u;
  const double dv = p1.v - p0.v;
  const int col_lo = std::max(0, static_cast<int>(std::ceil(p0.u)) - 1);
  const int col_hi = std::min(map.width() - 1, static_cast<int>(std::floor(p1.u)));

  auto v_at = [&](double u) {
    if (u <= p0.u) return p0.v;
    if (u >= p1.u) return p1.v;
    return p0.v + (u - p0.u) * (dv / du);
  };

  for (int col = col_lo; col <= col_hi; ++col) {
    double v_lo, v_hi;
    if (du == 0.0) {
      v_lo = std::min(p0.v, p1.v);
      v_hi = std::max(p0.v, p1.v);
    } else {
      const double u_lo = std::max(static_cast<double>(col), p0.u);
      const double u_hi = std::min(static_cast<double>(col + 1), p1.u);
      if (u_lo > u_hi) continue;
      const double va = v_at(u_lo);
      const double vb = v_at(u_hi);
      v_lo = std::min(va, vb);
      v_hi = std::max(va, vb);
    }
    const int row_lo = std::max(0, static_cast<int>(std::ceil(v_lo)) - 1);
    const int row_hi = std::min(map.height() - 1, static_cast<int>(std::floor(v_hi)));
    for (int row = row_lo; row <= row_hi; ++row) mask.insert({col, row});
  }
  return mask;
}

BarrierMask rasterize_chain(const OccupancyGridMap& map, const PolygonalChain& chain) {
  require_valid_chain(chain);
  BarrierMask mask = map.empty_mask();
  const std::size_t n = chain.points.size();
  for (std::size_t s = 0; s < chain.segment_count(); ++s) {
    mask |= rasterize_segment(map, {chain.points[s], chain.points[(s + 1) % n]});
  }
  return mask;
}

namespace {

// Moves p along d (grid units) to where the ray leaves the grid rectangle.
GridPoint exit_point(const OccupancyGridMap& map, GridPoint p, double du, double dv) {
  const double width = map.width();
  const double height = map.height();
  double t = std::numeric_limits<double>::infinity();
  if (du > 0.0) t = std::min(t, (width - p.u) / du);
  if (du < 0.0) t = std::min(t, (0.0 - p.u) / du);
  if (dv > 0.0) t = std::min(t, (height - p.v) / dv);
  if (dv < 0.0) t = std::min(t, (0.0 - p.v) / dv);
  t = std::max(t, 0.0);
  return {std::clamp(p.u + t * du, 0.0, width), std::clamp(p.v + t * dv, 0.0, height)};
}

}  // namespace

PolygonalChain extend_open_chain(const OccupancyGridMap& map, const PolygonalChain& chain) {
  if (chain.closed) {
    throw Error(ErrorCode::kInvalidChain, "closed chains are not extended");
  }
  if (chain.points.size() < 2) {
    throw Error(ErrorCode::kInvalidChain, "open chain needs at least 2 points");
  }
  for (const WorldPoint& p : chain.points) {
    if (!in_extent(map, p)) {
      throw Error(ErrorCode::kOutOfBounds, "chain point outside map extent",
                  "(" + format_double(p.x) + ", " + format_double(p.y) + ")");
    }
  }
  const auto& pts = chain.points;
  const std::size_t n = pts.size();

  PolygonalChain out = chain;
  {
    const GridPoint first = world_to_grid(map, pts[0]);
    const GridPoint second = world_to_grid(map, pts[1]);
    const GridPoint hit = exit_point(map, first, first.u - second.u, first.v - second.v);
    if (hit.u != first.u || hit.v != first.v) out.points.front() = grid_to_world(map, hit);
  }
  {
    const GridPoint last = world_to_grid(map, pts[n - 1]);
    const GridPoint before = world_to_grid(map, pts[n - 2]);
    const GridPoint hit = exit_point(map, last, last.u - before.u, last.v - before.v);
    if (hit.u != last.u || hit.v != last.v) out.points.back() = grid_to_world(map, hit);
  }
  return out;
}

}  // namespace border_forge
