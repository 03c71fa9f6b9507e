#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "border_forge/border_engine.hpp"
#include "border_forge/frames.hpp"
#include "border_forge/planner.hpp"
#include "border_forge/raster.hpp"

namespace border_forge {

// Uncommitted border under construction. Drawn red until committed.
struct Draft {
  std::vector<WorldPoint> points;
  bool closed = false;
  std::optional<WorldPoint> seed;
  double delta = 1.0;
};

struct DraftMeta {
  std::optional<bool> closed;
  std::optional<WorldPoint> seed;
  bool clear_seed = false;
  std::optional<double> delta;
};

struct SessionInfo {
  std::string id;
  std::string map_name;
  std::uint64_t revision = 0;
  Draft draft;
  std::size_t border_count = 0;
  // Geometry of the session map, for screen <-> world conversion.
  int width = 0;
  int height = 0;
  double resolution = 0.0;
  Pose2 origin;

  nlohmann::json to_json() const;
};

struct CommitSummary {
  std::uint64_t revision = 0;
  std::size_t border_index = 0;
  std::size_t connected_cells = 0;
  std::size_t barrier_cells = 0;
  std::size_t cells_changed = 0;

  nlohmann::json to_json() const;
};

struct PlanRequest {
  WorldPoint start;
  WorldPoint goal;
};

enum class PlanStatus { kNone, kOk, kNoPath };

struct RenderFrame {
  std::uint64_t revision = 0;
  RgbImage image;
  PlanStatus plan_status = PlanStatus::kNone;
  std::optional<Path> path;
  // Planner error class when plan_status is kNoPath.
  std::string plan_error;
};

struct SessionEvent {
  std::string session_id;
  std::uint64_t revision = 0;
  std::string type;  // created, draft, meta, commit, undo, clear

  nlohmann::json to_json() const;
};

struct ServiceOptions {
  BorderOptions border;
  double inflation_radius = kDefaultInflationRadius;
  // Frames used by the pose-simulation endpoint. The device pose replaces
  // the SoS -> Tango edge for each request.
  FrameGraph frames;
};

// Simulated device pose plus a ray in the device (Tango) frame.
struct PoseRay {
  Pose3 sos_from_tango;
  Eigen::Vector3d direction = -Eigen::Vector3d::UnitZ();
};

// Session registry behind the HTTP API. Mutations on one session are
// serialized by that session's mutex; different sessions proceed in parallel.
class TeachService {
 public:
  using Listener = std::function<void(const SessionEvent&)>;

  explicit TeachService(ServiceOptions options = {});
  TeachService(const TeachService&) = delete;
  TeachService& operator=(const TeachService&) = delete;

  // The first registered map also becomes "default".
  void register_map(const std::string& name, OccupancyGridMap map);
  // Registers under the file stem and returns that name.
  std::string register_map_file(const std::filesystem::path& metadata_path);
  std::vector<std::string> map_names() const;

  std::string create_session(const std::string& map_name = "default");
  SessionInfo session_info(const std::string& id) const;
  std::vector<SessionInfo> list_sessions() const;

  std::uint64_t add_draft_point(const std::string& id, WorldPoint p);
  std::uint64_t set_draft_meta(const std::string& id, const DraftMeta& meta);
  std::uint64_t clear_draft(const std::string& id);
  CommitSummary commit_draft(const std::string& id);
  std::uint64_t undo_last(const std::string& id);

  RenderFrame render(const std::string& id, const std::optional<PlanRequest>& plan = {}) const;
  Path plan(const std::string& id, const PlanRequest& request) const;
  BorderScript export_session(const std::string& id) const;
  OccupancyGridMap current_map(const std::string& id) const;

  // Casts the ray onto the floor. With `append` the hit becomes a draft point.
  WorldPoint pose_ray(const std::string& id, const PoseRay& request, bool append);

  std::uint64_t subscribe(Listener listener);
  void unsubscribe(std::uint64_t token);

 private:
  struct Entry {
    mutable std::mutex mutex;
    std::string id;
    std::string map_name;
    BorderSession session;
    Draft draft;
    std::uint64_t revision = 0;

    Entry(std::string id_, std::string map_name_, OccupancyGridMap prior, BorderOptions options)
        : id(std::move(id_)), map_name(std::move(map_name_)), session(std::move(prior), options) {}
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  SessionInfo info_locked(const Entry& entry) const;
  void publish(const SessionEvent& event);
  std::string new_id();

  ServiceOptions options_;

  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<const OccupancyGridMap>> maps_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::vector<std::string> session_order_;

  std::mutex id_mutex_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_;

  std::mutex listener_mutex_;
  std::map<std::uint64_t, Listener> listeners_;
  std::uint64_t next_token_ = 1;
};

std::string plan_status_name(PlanStatus status);

// Parses "x,y" in meters.
WorldPoint parse_point(const std::string& text);

}  // namespace border_forge
