#include "border_forge/evaluation.hpp"

#include "border_forge/error.hpp"

namespace border_forge {

nlohmann::json AccuracyReport::to_json() const {
  return {{"jaccard", jaccard},
          {"intersection_cells", intersection_cells},
          {"union_cells", union_cells},
          {"gt_only", gt_only},
          {"ud_only", ud_only}};
}

namespace {

void require_same_geometry(const OccupancyGridMap& a, const OccupancyGridMap& b) {
  if (!a.same_geometry(b)) {
    throw Error(ErrorCode::kGeometryMismatch, "maps have different geometry",
                std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

}  // namespace

RegionMask extract_virtual_area(const OccupancyGridMap& prior, const OccupancyGridMap& posterior,
                                const ExtractOptions& options) {
  require_same_geometry(prior, posterior);
  RegionMask area{prior.empty_mask(), RegionRole::kUserDefined};
  for (int row = 0; row < prior.height(); ++row) {
    for (int col = 0; col < prior.width(); ++col) {
      const CellIndex c{col, row};
      if (prior.is_traversable(c) && !posterior.is_traversable(c)) area.cells.insert(c);
    }
  }
  if (!options.include_barrier && options.barrier.width() > 0) area.cells.subtract(options.barrier);
  return area;
}

CellMask session_barrier(const BorderSession& session) {
  CellMask all = session.prior().empty_mask();
  for (const auto& entry : session.applied()) all |= entry.barrier;
  return all;
}

RegionMask ground_truth_from_map(const OccupancyGridMap& gt, const OccupancyGridMap& prior) {
  require_same_geometry(gt, prior);
  RegionMask area{prior.empty_mask(), RegionRole::kGroundTruth};
  for (int row = 0; row < prior.height(); ++row) {
    for (int col = 0; col < prior.width(); ++col) {
      const CellIndex c{col, row};
      if (gt.is_occupied(c) && prior.is_traversable(c)) area.cells.insert(c);
    }
  }
  return area;
}

AccuracyReport jaccard(const RegionMask& gt, const RegionMask& ud) {
  if (!gt.cells.same_geometry(ud.cells)) {
    throw Error(ErrorCode::kGeometryMismatch, "region masks have different geometry");
  }
  AccuracyReport report;
  const auto a = gt.cells.bits();
  const auto b = ud.cells.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      ++report.intersection_cells;
    } else if (a[i]) {
      ++report.gt_only;
    } else if (b[i]) {
      ++report.ud_only;
    }
  }
  report.union_cells = report.intersection_cells + report.gt_only + report.ud_only;
  if (report.union_cells == 0) throw Error(ErrorCode::kEmptyUnion, "both regions are empty");
  report.jaccard = static_cast<double>(report.intersection_cells) / static_cast<double>(report.union_cells);
  return report;
}

RgbImage overlay_image(const OccupancyGridMap& map, const RegionMask& gt, const RegionMask& ud) {
  const CellMask reference = map.empty_mask();
  if (!gt.cells.same_geometry(reference) || !ud.cells.same_geometry(reference)) {
    throw Error(ErrorCode::kGeometryMismatch, "region mask does not match the map");
  }
  RgbImage image = render_map(map);
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const CellIndex c{col, row};
      const bool in_gt = gt.cells.contains(c);
      const bool in_ud = ud.cells.contains(c);
      if (in_gt && in_ud) {
        paint_cell(image, c, colors::kGreen);
      } else if (in_gt) {
        paint_cell(image, c, colors::kYellow);
      } else if (in_ud) {
        paint_cell(image, c, colors::kRed);
      }
    }
  }
  return image;
}

void render_overlay(const OccupancyGridMap& map, const RegionMask& gt, const RegionMask& ud,
                    const std::filesystem::path& path) {
  write_png(overlay_image(map, gt, ud), path);
}

}  // namespace border_forge
