#include "border_forge/border_engine.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "border_forge/error.hpp"

namespace border_forge {

PolygonalChain effective_chain(const OccupancyGridMap& map, const PolygonalChain& chain) {
  require_valid_chain(chain);
  if (chain.closed) return chain;
  return extend_open_chain(map, chain);
}

PartitionResult partition(const OccupancyGridMap& map, const PolygonalChain& chain, WorldPoint seed) {
  BarrierMask barrier = rasterize_chain(map, chain);
  if (!in_extent(map, seed)) {
    throw Error(ErrorCode::kSeedOutOfBounds, "seed outside map extent",
                "(" + format_double(seed.x) + ", " + format_double(seed.y) + ")");
  }
  const CellIndex seed_cell = world_to_cell(map, seed);
  if (barrier.contains(seed_cell)) {
    throw Error(ErrorCode::kSeedOnBarrier, "seed lies on the border",
                "cell (" + std::to_string(seed_cell.col) + ", " + std::to_string(seed_cell.row) + ")");
  }
  if (!map.is_traversable(seed_cell)) {
    throw Error(ErrorCode::kSeedNotTraversable, "seed on non-traversable cell",
                "cell (" + std::to_string(seed_cell.col) + ", " + std::to_string(seed_cell.row) + ")");
  }

  CellMask connected = map.empty_mask();
  std::vector<CellIndex> stack{seed_cell};
  connected.insert(seed_cell);
  constexpr int kSteps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    for (const auto& step : kSteps) {
      const CellIndex n{c.col + step[0], c.row + step[1]};
      if (!map.in_bounds(n) || connected.contains(n) || barrier.contains(n) || !map.is_traversable(n)) {
        continue;
      }
      connected.insert(n);
      stack.push_back(n);
    }
  }

  CellMask complement = map.empty_mask();
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      if (!connected.contains({col, row}) && !barrier.contains({col, row})) complement.insert({col, row});
    }
  }
  return {std::move(connected), std::move(complement), std::move(barrier), seed_cell};
}

OccupancyGridMap compose_posterior(const OccupancyGridMap& prior, const PartitionResult& parts,
                                   double delta, BarrierMode mode) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kInvalidDelta, "delta must lie in [0,1]", format_double(delta));
  }
  OccupancyGridMap posterior = prior;
  for (int row = 0; row < prior.height(); ++row) {
    for (int col = 0; col < prior.width(); ++col) {
      const CellIndex c{col, row};
      if (parts.connected.contains(c)) {
        posterior.set(c, delta);
      } else if (parts.barrier.contains(c)) {
        posterior.set(c, mode == BarrierMode::kStrict ? delta : std::max(1.0, prior.at(c)));
      }
    }
  }
  return posterior;
}

// --- Script format -------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, "invalid border script: " + where + " " + what, where);
}

WorldPoint parse_point(const json& node, const std::string& where) {
  if (!node.is_array() || node.size() != 2 || !node[0].is_number() || !node[1].is_number()) {
    field_error(where, "must be [x, y]");
  }
  return {node[0].get<double>(), node[1].get<double>()};
}

json point_json(WorldPoint p) { return json::array({p.x, p.y}); }

}  // namespace

BorderScript parse_script(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "malformed JSON at byte " + std::to_string(e.byte), e.what());
  }
  if (!root.is_object() || !root.contains("borders") || !root["borders"].is_array()) {
    field_error("$", "must be an object with a 'borders' array");
  }
  BorderScript script;
  const json& borders = root["borders"];
  for (std::size_t i = 0; i < borders.size(); ++i) {
    const std::string where = "$.borders[" + std::to_string(i) + "]";
    const json& b = borders[i];
    if (!b.is_object()) field_error(where, "must be an object");
    VirtualBorder border;
    if (!b.contains("points") || !b["points"].is_array()) field_error(where + ".points", "is required");
    for (std::size_t k = 0; k < b["points"].size(); ++k) {
      border.chain.points.push_back(parse_point(b["points"][k], where + ".points[" + std::to_string(k) + "]"));
    }
    if (b.contains("closed")) {
      if (!b["closed"].is_boolean()) field_error(where + ".closed", "must be a boolean");
      border.chain.closed = b["closed"].get<bool>();
    }
    if (!b.contains("seed")) field_error(where + ".seed", "is required");
    border.seed = parse_point(b["seed"], where + ".seed");
    if (!b.contains("delta") || !b["delta"].is_number()) field_error(where + ".delta", "must be a number");
    border.delta = b["delta"].get<double>();
    script.borders.push_back(std::move(border));
  }
  return script;
}

BorderScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open border script", path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_script(text);
}

nlohmann::json script_to_json(const BorderScript& script) {
  json borders = json::array();
  for (const auto& border : script.borders) {
    json points = json::array();
    for (const auto& p : border.chain.points) points.push_back(point_json(p));
    borders.push_back({{"points", std::move(points)},
                       {"closed", border.chain.closed},
                       {"seed", point_json(border.seed)},
                       {"delta", border.delta}});
  }
  return {{"borders", std::move(borders)}};
}

std::string serialize_script(const BorderScript& script) { return script_to_json(script).dump(2) + "\n"; }

// --- Session -----------------------------------------------------------------------

BorderSession::BorderSession(OccupancyGridMap prior, BorderOptions options)
    : prior_(std::move(prior)), current_(prior_), options_(options) {}

const AppliedBorder& BorderSession::apply(const VirtualBorder& border) {
  if (!(border.delta >= 0.0 && border.delta <= 1.0)) {
    throw Error(ErrorCode::kInvalidDelta, "delta must lie in [0,1]", format_double(border.delta));
  }
  for (const WorldPoint& p : border.chain.points) {
    if (!in_extent(current_, p)) {
      throw Error(ErrorCode::kOutOfBounds, "border point outside map extent",
                  "(" + format_double(p.x) + ", " + format_double(p.y) + ")");
    }
  }
  const PolygonalChain chain = effective_chain(current_, border.chain);
  PartitionResult parts = partition(current_, chain, border.seed);
  OccupancyGridMap posterior = compose_posterior(current_, parts, border.delta, options_.barrier_mode);

  std::size_t changed = 0;
  const auto before = current_.values();
  const auto after = posterior.values();
  for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != after[i];

  applied_.push_back({border, std::move(current_), std::move(parts.barrier), parts.connected.count(), changed});
  current_ = std::move(posterior);
  return applied_.back();
}

const OccupancyGridMap& BorderSession::undo() {
  if (applied_.empty()) throw Error(ErrorCode::kEmptySession, "no border to undo");
  current_ = std::move(applied_.back().before);
  applied_.pop_back();
  return current_;
}

BorderScript BorderSession::script() const {
  BorderScript script;
  for (const auto& entry : applied_) script.borders.push_back(entry.border);
  return script;
}

const OccupancyGridMap& apply_border(BorderSession& session, const VirtualBorder& border) {
  session.apply(border);
  return session.current();
}

const OccupancyGridMap& undo(BorderSession& session) { return session.undo(); }

BorderSession apply_script(const OccupancyGridMap& prior, const BorderScript& script, BorderOptions options) {
  BorderSession session(prior, options);
  for (std::size_t i = 0; i < script.borders.size(); ++i) {
    try {
      session.apply(script.borders[i]);
    } catch (Error& e) {
      e.with_border_index(i);
      throw;
    }
  }
  return session;
}

}  // namespace border_forge
