#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "border_forge/geometry.hpp"
#include "border_forge/gridmap.hpp"

namespace border_forge {

// A virtual border: chain, seed point selecting the side, and the occupancy
// value written to that side.
struct VirtualBorder {
  PolygonalChain chain;
  WorldPoint seed;
  double delta = 1.0;

  friend bool operator==(const VirtualBorder&, const VirtualBorder&) = default;
};

// What the rasterized chain cells receive in the posterior.
enum class BarrierMode {
  kOccupied,  // max(1.0, prior)
  kStrict,    // delta, same as the connected area
};

struct BorderOptions {
  BarrierMode barrier_mode = BarrierMode::kOccupied;
};

struct PartitionResult {
  CellMask connected;   // A_c
  CellMask complement;  // A_nc
  BarrierMask barrier;
  CellIndex seed_cell;
};

// Splits the map along the rasterized chain. Open chains must already be
// extended. The connected area is the 4-connected flood of traversable,
// non-barrier cells from the seed cell.
PartitionResult partition(const OccupancyGridMap& map, const PolygonalChain& chain, WorldPoint seed);

// Cells in connected take delta, complement cells keep their prior value,
// barrier cells follow `mode`.
OccupancyGridMap compose_posterior(const OccupancyGridMap& prior, const PartitionResult& parts,
                                   double delta, BarrierMode mode);

// The chain actually rasterized for a border: open chains are extended to the
// map rectangle, closed chains pass through unchanged.
PolygonalChain effective_chain(const OccupancyGridMap& map, const PolygonalChain& chain);

struct BorderScript {
  std::vector<VirtualBorder> borders;

  friend bool operator==(const BorderScript&, const BorderScript&) = default;
};

// Throws kParse with the byte position or the offending field path.
BorderScript parse_script(const std::string& text);
BorderScript load_script(const std::filesystem::path& path);
nlohmann::json script_to_json(const BorderScript& script);
std::string serialize_script(const BorderScript& script);

struct AppliedBorder {
  VirtualBorder border;
  OccupancyGridMap before;  // snapshot for undo
  BarrierMask barrier;
  std::size_t connected_cells = 0;
  std::size_t cells_changed = 0;
};

// Ordered sequence of applied borders over a prior map. Single writer.
class BorderSession {
 public:
  explicit BorderSession(OccupancyGridMap prior, BorderOptions options = {});

  const OccupancyGridMap& prior() const { return prior_; }
  const OccupancyGridMap& current() const { return current_; }
  const BorderOptions& options() const { return options_; }
  const std::vector<AppliedBorder>& applied() const { return applied_; }

  // Validates the border against the current map, applies it and records an
  // undo snapshot. On error the session is unchanged.
  const AppliedBorder& apply(const VirtualBorder& border);

  // Reverts the most recent border. Throws kEmptySession when nothing is applied.
  const OccupancyGridMap& undo();

  BorderScript script() const;

 private:
  OccupancyGridMap prior_;
  OccupancyGridMap current_;
  BorderOptions options_;
  std::vector<AppliedBorder> applied_;
};

const OccupancyGridMap& apply_border(BorderSession& session, const VirtualBorder& border);
const OccupancyGridMap& undo(BorderSession& session);

// Applies every border in order. Failures carry the border index.
BorderSession apply_script(const OccupancyGridMap& prior, const BorderScript& script,
                           BorderOptions options = {});

}  // namespace border_forge
