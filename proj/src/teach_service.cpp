#include "border_forge/teach_service.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

#include "border_forge/error.hpp"

namespace border_forge {

namespace {

// Committed borders: dark enough to read as "solid" on the map.
constexpr Rgb kCommitted{0, 120, 0};

nlohmann::json point_json(WorldPoint p) { return nlohmann::json::array({p.x, p.y}); }

void paint_mask(RgbImage& image, const CellMask& mask, Rgb color) {
  for (const CellIndex& c : mask.cells()) paint_cell(image, c, color);
}

void paint_frame(RgbImage& image, Rgb color) {
  for (int x = 0; x < image.width(); ++x) {
    image.set(x, 0, color);
    image.set(x, image.height() - 1, color);
  }
  for (int y = 0; y < image.height(); ++y) {
    image.set(0, y, color);
    image.set(image.width() - 1, y, color);
  }
}

CellMask draft_mask(const OccupancyGridMap& map, const Draft& draft) {
  CellMask mask = map.empty_mask();
  const auto& pts = draft.points;
  if (pts.size() == 1) mask.insert(world_to_cell(map, pts.front()));
  const auto add = [&](WorldPoint a, WorldPoint b) {
    if (a == b) {
      mask.insert(world_to_cell(map, a));
      return;
    }
    mask |= rasterize_segment(map, {a, b});
  };
  for (std::size_t i = 1; i < pts.size(); ++i) add(pts[i - 1], pts[i]);
  if (draft.closed && pts.size() >= 3) add(pts.back(), pts.front());
  return mask;
}

}  // namespace

nlohmann::json SessionInfo::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : draft.points) pts.push_back(point_json(p));
  return {
      {"id", id},
      {"map", map_name},
      {"revision", revision},
      {"borders", border_count},
      {"draft",
       {{"points", pts},
        {"closed", draft.closed},
        {"seed", draft.seed ? point_json(*draft.seed) : nlohmann::json(nullptr)},
        {"delta", draft.delta}}},
      {"geometry",
       {{"width", width},
        {"height", height},
        {"resolution", resolution},
        {"origin", {origin.x, origin.y, origin.yaw}}}},
  };
}

nlohmann::json CommitSummary::to_json() const {
  return {{"revision", revision},
          {"border_index", border_index},
          {"connected_cells", connected_cells},
          {"barrier_cells", barrier_cells},
          {"cells_changed", cells_changed}};
}

nlohmann::json SessionEvent::to_json() const {
  return {{"session", session_id}, {"revision", revision}, {"event", type}};
}

std::string plan_status_name(PlanStatus status) {
  switch (status) {
    case PlanStatus::kOk: return "ok";
    case PlanStatus::kNoPath: return "no_path";
    case PlanStatus::kNone: break;
  }
  return "none";
}

WorldPoint parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::kParse, "expected x,y", text);
  const auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
      throw Error(ErrorCode::kParse, "expected x,y", text);
    }
    return v;
  };
  const std::string_view view(text);
  return {number(view.substr(0, comma)), number(view.substr(comma + 1))};
}

TeachService::TeachService(ServiceOptions options)
    : options_(std::move(options)), id_salt_(std::random_device{}()) {
  id_salt_ = (id_salt_ << 32) ^ std::random_device{}();
  // Without a configured registration the area description is the map frame.
  try {
    options_.frames.lookup_transform(frame_names::kSos, frame_names::kMap);
  } catch (const Error&) {
    options_.frames.set_edge(frame_names::kMap, frame_names::kAdf, Pose3::identity());
    options_.frames.set_edge(frame_names::kAdf, frame_names::kSos, Pose3::identity());
  }
}

void TeachService::register_map(const std::string& name, OccupancyGridMap map) {
  auto shared = std::make_shared<const OccupancyGridMap>(std::move(map));
  std::unique_lock lock(registry_mutex_);
  if (maps_.empty()) maps_["default"] = shared;
  maps_[name] = shared;
}

std::string TeachService::register_map_file(const std::filesystem::path& metadata_path) {
  const std::string name = metadata_path.stem().string();
  register_map(name, load_map(metadata_path));
  return name;
}

std::vector<std::string> TeachService::map_names() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> names;
  for (const auto& [name, map] : maps_) names.push_back(name);
  return names;
}

std::string TeachService::new_id() {
  std::lock_guard lock(id_mutex_);
  // splitmix64 over a salted counter: unique within the process, hard to guess.
  std::uint64_t z = id_salt_ + 0x9e3779b97f4a7c15ULL * ++id_counter_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
  return buf;
}

std::string TeachService::create_session(const std::string& map_name) {
  std::shared_ptr<const OccupancyGridMap> prior;
  {
    std::shared_lock lock(registry_mutex_);
    const auto it = maps_.find(map_name);
    if (it == maps_.end()) throw Error(ErrorCode::kNotFound, "unknown map", map_name);
    prior = it->second;
  }
  auto entry = std::make_shared<Entry>(new_id(), map_name, *prior, options_.border);
  const std::string id = entry->id;
  {
    std::unique_lock lock(registry_mutex_);
    sessions_[id] = entry;
    session_order_.push_back(id);
  }
  publish({id, 0, "created"});
  return id;
}

std::shared_ptr<TeachService::Entry> TeachService::find(const std::string& id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session", id);
  return it->second;
}

SessionInfo TeachService::info_locked(const Entry& entry) const {
  const OccupancyGridMap& map = entry.session.current();
  SessionInfo info;
  info.id = entry.id;
  info.map_name = entry.map_name;
  info.revision = entry.revision;
  info.draft = entry.draft;
  info.border_count = entry.session.applied().size();
  info.width = map.width();
  info.height = map.height();
  info.resolution = map.resolution();
  info.origin = map.origin();
  return info;
}

SessionInfo TeachService::session_info(const std::string& id) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return info_locked(*entry);
}

std::vector<SessionInfo> TeachService::list_sessions() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(registry_mutex_);
    for (const auto& id : session_order_) entries.push_back(sessions_.at(id));
  }
  std::vector<SessionInfo> out;
  for (const auto& e : entries) {
    std::lock_guard lock(e->mutex);
    out.push_back(info_locked(*e));
  }
  return out;
}

std::uint64_t TeachService::add_draft_point(const std::string& id, WorldPoint p) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !in_extent(entry->session.current(), p)) {
    throw Error(ErrorCode::kOutOfBounds, "point outside the map",
                format_double(p.x) + "," + format_double(p.y));
  }
  entry->draft.points.push_back(p);
  publish({id, ++entry->revision, "draft"});
  return entry->revision;
}

std::uint64_t TeachService::set_draft_meta(const std::string& id, const DraftMeta& meta) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (meta.delta && !(*meta.delta >= 0.0 && *meta.delta <= 1.0)) {
    throw Error(ErrorCode::kInvalidDelta, "delta must lie in [0, 1]", format_double(*meta.delta));
  }
  if (meta.seed && !in_extent(entry->session.current(), *meta.seed)) {
    throw Error(ErrorCode::kSeedOutOfBounds, "seed outside the map");
  }
  if (meta.closed) entry->draft.closed = *meta.closed;
  if (meta.clear_seed) entry->draft.seed.reset();
  if (meta.seed) entry->draft.seed = meta.seed;
  if (meta.delta) entry->draft.delta = *meta.delta;
  publish({id, ++entry->revision, "meta"});
  return entry->revision;
}

std::uint64_t TeachService::clear_draft(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  entry->draft = Draft{};
  publish({id, ++entry->revision, "clear"});
  return entry->revision;
}

CommitSummary TeachService::commit_draft(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  const Draft& draft = entry->draft;
  if (draft.points.empty()) throw Error(ErrorCode::kNoDraft, "nothing to commit");
  if (!draft.seed) throw Error(ErrorCode::kNoDraft, "draft has no seed point");

  const VirtualBorder border{{draft.points, draft.closed}, *draft.seed, draft.delta};
  const AppliedBorder& applied = entry->session.apply(border);
  CommitSummary summary;
  summary.border_index = entry->session.applied().size() - 1;
  summary.connected_cells = applied.connected_cells;
  summary.barrier_cells = applied.barrier.count();
  summary.cells_changed = applied.cells_changed;
  entry->draft = Draft{};
  summary.revision = ++entry->revision;
  publish({id, summary.revision, "commit"});
  return summary;
}

std::uint64_t TeachService::undo_last(const std::string& id) {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  entry->session.undo();
  publish({id, ++entry->revision, "undo"});
  return entry->revision;
}

RenderFrame TeachService::render(const std::string& id, const std::optional<PlanRequest>& plan) const {
  const auto entry = find(id);
  RenderFrame frame;
  std::optional<OccupancyGridMap> map;
  CellMask committed;
  Draft draft;
  {
    std::lock_guard lock(entry->mutex);
    frame.revision = entry->revision;
    map.emplace(entry->session.current());
    committed = map->empty_mask();
    for (const auto& a : entry->session.applied()) committed |= a.barrier;
    draft = entry->draft;
  }

  frame.image = render_map(*map);
  paint_mask(frame.image, committed, kCommitted);
  paint_mask(frame.image, draft_mask(*map, draft), colors::kRed);
  if (draft.seed) paint_cell(frame.image, world_to_cell(*map, *draft.seed), colors::kMagenta);

  if (plan) {
    try {
      frame.path = plan_path(build_costmap(*map, options_.inflation_radius), plan->start, plan->goal);
      frame.plan_status = PlanStatus::kOk;
      for (const CellIndex& c : frame.path->cells) paint_cell(frame.image, c, colors::kBlue);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kOutOfBounds) throw;
      frame.plan_status = PlanStatus::kNoPath;
      frame.plan_error = std::string(e.class_name());
      paint_frame(frame.image, colors::kRed);
    }
  }
  return frame;
}

Path TeachService::plan(const std::string& id, const PlanRequest& request) const {
  return plan_path(build_costmap(current_map(id), options_.inflation_radius), request.start, request.goal);
}

BorderScript TeachService::export_session(const std::string& id) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.script();
}

OccupancyGridMap TeachService::current_map(const std::string& id) const {
  const auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session.current();
}

WorldPoint TeachService::pose_ray(const std::string& id, const PoseRay& request, bool append) {
  find(id);
  FrameGraph graph = options_.frames;
  graph.set_edge(frame_names::kSos, frame_names::kTango, request.sos_from_tango);
  const WorldPoint hit = ray_ground_intersection(graph, Ray::make(Eigen::Vector3d::Zero(), request.direction));
  if (append) add_draft_point(id, hit);
  return hit;
}

std::uint64_t TeachService::subscribe(Listener listener) {
  std::lock_guard lock(listener_mutex_);
  const std::uint64_t token = next_token_++;
  listeners_[token] = std::move(listener);
  return token;
}

void TeachService::unsubscribe(std::uint64_t token) {
  std::lock_guard lock(listener_mutex_);
  listeners_.erase(token);
}

void TeachService::publish(const SessionEvent& event) {
  std::lock_guard lock(listener_mutex_);
  for (const auto& [token, listener] : listeners_) listener(event);
}

}  // namespace border_forge
