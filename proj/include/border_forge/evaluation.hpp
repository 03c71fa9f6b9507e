#pragma once

#include <cstddef>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "border_forge/border_engine.hpp"
#include "border_forge/gridmap.hpp"
#include "border_forge/raster.hpp"

namespace border_forge {

enum class RegionRole { kGroundTruth, kUserDefined };

struct RegionMask {
  CellMask cells;
  RegionRole role = RegionRole::kUserDefined;
};

struct AccuracyReport {
  double jaccard = 0.0;
  std::size_t intersection_cells = 0;
  std::size_t union_cells = 0;
  std::size_t gt_only = 0;
  std::size_t ud_only = 0;

  nlohmann::json to_json() const;
};

struct ExtractOptions {
  bool include_barrier = true;
  // Cells of the rasterized borders; subtracted when include_barrier is false.
  CellMask barrier;
};

// Cells that were traversable in the prior and are not in the posterior.
RegionMask extract_virtual_area(const OccupancyGridMap& prior, const OccupancyGridMap& posterior,
                                const ExtractOptions& options = {});

// Union of every applied border's barrier cells.
CellMask session_barrier(const BorderSession& session);

// Ground-truth area from a map file: occupied cells of `gt` that are
// traversable in `prior`.
RegionMask ground_truth_from_map(const OccupancyGridMap& gt, const OccupancyGridMap& prior);

// |GT ∩ UD| / |GT ∪ UD|. Throws kEmptyUnion when both masks are empty.
AccuracyReport jaccard(const RegionMask& gt, const RegionMask& ud);

// Grayscale map with green = GT ∩ UD, yellow = GT only, red = UD only.
RgbImage overlay_image(const OccupancyGridMap& map, const RegionMask& gt, const RegionMask& ud);
void render_overlay(const OccupancyGridMap& map, const RegionMask& gt, const RegionMask& ud,
                    const std::filesystem::path& path);

}  // namespace border_forge
