#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "border_forge/gridmap.hpp"

namespace border_forge {

// Ordered world-frame points. A closed chain implicitly connects the last
// point back to the first.
struct PolygonalChain {
  std::vector<WorldPoint> points;
  bool closed = false;

  std::size_t segment_count() const;

  friend bool operator==(const PolygonalChain&, const PolygonalChain&) = default;
};

struct LineSegment {
  WorldPoint a;
  WorldPoint b;
};

// Cells covered by a rasterized chain.
using BarrierMask = CellMask;

enum class ChainIssueKind { kArity, kNonFinite, kRepeatedPoint, kSelfIntersection };

struct ChainIssue {
  ChainIssueKind kind;
  std::string message;
  // Offending point or segment indices.
  std::vector<std::size_t> indices;
};

struct ValidationReport {
  std::vector<ChainIssue> issues;

  bool valid() const { return issues.empty(); }
  bool has(ChainIssueKind kind) const;
  std::string summary() const;
};

ValidationReport validate_chain(const PolygonalChain& chain);

// Throws kInvalidChain carrying the report summary when the chain is invalid.
void require_valid_chain(const PolygonalChain& chain);

// Supercover: every cell whose closed square the segment touches. The result
// is independent of endpoint order.
BarrierMask rasterize_segment(const OccupancyGridMap& map, const LineSegment& segment);

BarrierMask rasterize_chain(const OccupancyGridMap& map, const PolygonalChain& chain);

// Extends the first segment backward and the last segment forward until both
// reach the map rectangle. Interior points are copied unchanged.
PolygonalChain extend_open_chain(const OccupancyGridMap& map, const PolygonalChain& chain);

// True when segments [a,b] and [c,d] share at least one point.
bool segments_intersect(WorldPoint a, WorldPoint b, WorldPoint c, WorldPoint d);

}  // namespace border_forge
