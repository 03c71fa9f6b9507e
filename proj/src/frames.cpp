#include "border_forge/frames.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>

#include "border_forge/error.hpp"

namespace border_forge {

Pose3 Pose3::from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
  Pose3 pose;
  pose.rotation = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                   Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                   Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                      .toRotationMatrix();
  pose.translation = xyz;
  return pose;
}

Pose3 Pose3::planar(double x, double y, double yaw) {
  return from_xyz_rpy({x, y, 0.0}, {0.0, 0.0, yaw});
}

Pose3 Pose3::inverse() const {
  Pose3 inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

bool Pose3::is_valid(double tolerance) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double orth = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orth <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
}

Pose3 compose(const Pose3& a, const Pose3& b) {
  Pose3 out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

double pose_distance(const Pose3& a, const Pose3& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

// --- FrameGraph ----------------------------------------------------------------

FrameGraph::FrameGraph()
    : frames_{frame_names::kMap, frame_names::kAdf, frame_names::kSos, frame_names::kTango,
              frame_names::kRobot} {}

FrameGraph::FrameGraph(const FrameGraph& other) {
  std::shared_lock lock(other.mutex_);
  frames_ = other.frames_;
  parent_of_ = other.parent_of_;
}

FrameGraph& FrameGraph::operator=(const FrameGraph& other) {
  if (this == &other) return *this;
  std::unique_lock lock(mutex_, std::defer_lock);
  std::shared_lock other_lock(other.mutex_, std::defer_lock);
  std::lock(lock, other_lock);
  frames_ = other.frames_;
  parent_of_ = other.parent_of_;
  return *this;
}

void FrameGraph::add_frame(const std::string& name) {
  std::unique_lock lock(mutex_);
  if (std::find(frames_.begin(), frames_.end(), name) == frames_.end()) frames_.push_back(name);
}

bool FrameGraph::has_frame(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return std::find(frames_.begin(), frames_.end(), name) != frames_.end();
}

std::vector<std::string> FrameGraph::frames() const {
  std::shared_lock lock(mutex_);
  return frames_;
}

std::vector<std::string> FrameGraph::ancestry(const std::string& name) const {
  std::vector<std::string> chain{name};
  auto it = parent_of_.find(name);
  while (it != parent_of_.end()) {
    chain.push_back(it->second.parent);
    it = parent_of_.find(it->second.parent);
  }
  return chain;
}

void FrameGraph::set_edge(const std::string& parent, const std::string& child,
                          const Pose3& parent_from_child) {
  if (parent == child) throw Error(ErrorCode::kFrameGraph, "frame cannot be its own parent", child);
  if (!parent_from_child.is_valid()) {
    throw Error(ErrorCode::kFrameGraph, "edge transform is not a rigid motion", parent + "->" + child);
  }
  std::unique_lock lock(mutex_);
  for (const auto& name : {parent, child}) {
    if (std::find(frames_.begin(), frames_.end(), name) == frames_.end()) frames_.push_back(name);
  }
  auto existing = parent_of_.find(child);
  if (existing != parent_of_.end()) {
    if (existing->second.parent != parent) {
      throw Error(ErrorCode::kFrameGraph, "frame already has a parent",
                  child + " has parent " + existing->second.parent);
    }
    existing->second.parent_from_child = parent_from_child;
    return;
  }
  const auto up = ancestry(parent);
  if (std::find(up.begin(), up.end(), child) != up.end()) {
    throw Error(ErrorCode::kFrameGraph, "edge would create a cycle", parent + "->" + child);
  }
  parent_of_.emplace(child, Edge{parent, parent_from_child});
}

void FrameGraph::remove_edge(const std::string& child) {
  std::unique_lock lock(mutex_);
  parent_of_.erase(child);
}

Pose3 FrameGraph::lookup_transform(const std::string& from, const std::string& to) const {
  std::shared_lock lock(mutex_);
  for (const auto& name : {from, to}) {
    if (std::find(frames_.begin(), frames_.end(), name) == frames_.end()) {
      throw Error(ErrorCode::kUnknownFrame, "unknown frame", name);
    }
  }
  if (from == to) return Pose3::identity();

  const auto from_chain = ancestry(from);
  const auto to_chain = ancestry(to);
  // Lowest common ancestor: first frame on from's chain that is also on to's.
  std::size_t from_depth = 0;
  std::size_t to_depth = 0;
  bool found = false;
  for (; from_depth < from_chain.size(); ++from_depth) {
    auto it = std::find(to_chain.begin(), to_chain.end(), from_chain[from_depth]);
    if (it != to_chain.end()) {
      to_depth = static_cast<std::size_t>(it - to_chain.begin());
      found = true;
      break;
    }
  }
  if (!found) throw Error(ErrorCode::kDisconnectedFrames, "frames are not connected", from + " / " + to);

  // Both sides expressed in the common ancestor, then chained through it.
  Pose3 up_from;
  for (std::size_t i = 0; i < from_depth; ++i) {
    up_from = compose(parent_of_.at(from_chain[i]).parent_from_child, up_from);
  }
  Pose3 up_to;
  for (std::size_t i = 0; i < to_depth; ++i) {
    up_to = compose(parent_of_.at(to_chain[i]).parent_from_child, up_to);
  }
  return compose(up_to.inverse(), up_from);
}

namespace {

Eigen::Vector3d vec3(const YAML::Node& node, const char* key, std::size_t index) {
  const YAML::Node value = node[key];
  if (!value) return Eigen::Vector3d::Zero();
  std::vector<double> v;
  try {
    v = value.as<std::vector<double>>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, "frame edge " + std::to_string(index) + ": bad '" + key + "'", e.what());
  }
  if (v.size() != 3) {
    throw Error(ErrorCode::kParse, "frame edge " + std::to_string(index) + ": '" + key + "' needs 3 values");
  }
  return {v[0], v[1], v[2]};
}

FrameGraph graph_from_yaml(const YAML::Node& root) {
  const YAML::Node edges = root.IsMap() && root["edges"] ? root["edges"] : root;
  if (!edges.IsSequence()) throw Error(ErrorCode::kParse, "frame configuration must be a list of edges");
  FrameGraph graph;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const YAML::Node edge = edges[i];
    if (!edge["parent"] || !edge["child"]) {
      throw Error(ErrorCode::kParse, "frame edge " + std::to_string(i) + " needs parent and child");
    }
    graph.set_edge(edge["parent"].as<std::string>(), edge["child"].as<std::string>(),
                   Pose3::from_xyz_rpy(vec3(edge, "xyz", i), vec3(edge, "rpy", i)));
  }
  return graph;
}

}  // namespace

FrameGraph parse_frame_graph(const std::string& yaml_text) {
  try {
    return graph_from_yaml(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, "malformed frame configuration", e.what());
  }
}

FrameGraph load_frame_graph(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kIo, "frame configuration not found", path.string());
  try {
    return graph_from_yaml(YAML::LoadFile(path.string()));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, "malformed frame configuration", e.what());
  }
}

// --- Ray casting -------------------------------------------------------------------

Ray Ray::make(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction) {
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kInvalidArgument, "ray direction must be non-zero");
  }
  return {origin, direction / norm};
}

WorldPoint ray_ground_intersection(const FrameGraph& graph, const Ray& ray_in_tango) {
  const Pose3 map_from_tango = graph.lookup_transform(frame_names::kTango, frame_names::kMap);
  const Eigen::Vector3d origin = map_from_tango.apply(ray_in_tango.origin);
  const Eigen::Vector3d direction = map_from_tango.rotation * ray_in_tango.direction;
  if (std::abs(direction.z()) < 1e-12) {
    throw Error(ErrorCode::kParallelRay, "ray is parallel to the ground plane");
  }
  const double t = -origin.z() / direction.z();
  if (!(t > 0.0)) throw Error(ErrorCode::kBackwardRay, "ground plane is behind the ray origin");
  const Eigen::Vector3d hit = origin + t * direction;
  return {hit.x(), hit.y()};
}

// --- Registration ------------------------------------------------------------------

WorldPoint Registration::apply(WorldPoint p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * p.x - s * p.y + translation.x(), s * p.x + c * p.y + translation.y()};
}

Registration estimate_registration(const std::vector<Correspondence>& pairs) {
  if (pairs.size() < 2) {
    throw Error(ErrorCode::kRegistration, "registration needs at least 2 correspondences",
                std::to_string(pairs.size()) + " given");
  }
  Eigen::Vector2d source_mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d target_mean = Eigen::Vector2d::Zero();
  for (const auto& pair : pairs) {
    source_mean += Eigen::Vector2d(pair.source.x, pair.source.y);
    target_mean += Eigen::Vector2d(pair.target.x, pair.target.y);
  }
  source_mean /= static_cast<double>(pairs.size());
  target_mean /= static_cast<double>(pairs.size());

  // Closed-form 2D Procrustes: the optimal angle maximizes
  // sum(a_i . R b_i) and is atan2(sum cross, sum dot) over centered points.
  double dot_sum = 0.0;
  double cross_sum = 0.0;
  double spread = 0.0;
  for (const auto& pair : pairs) {
    const Eigen::Vector2d a = Eigen::Vector2d(pair.source.x, pair.source.y) - source_mean;
    const Eigen::Vector2d b = Eigen::Vector2d(pair.target.x, pair.target.y) - target_mean;
    dot_sum += a.dot(b);
    cross_sum += a.x() * b.y() - a.y() * b.x();
    spread += a.squaredNorm();
  }
  if (!(spread > 1e-18)) {
    throw Error(ErrorCode::kRegistration, "source points coincide; rotation unobservable");
  }

  Registration reg;
  reg.yaw = std::atan2(cross_sum, dot_sum);
  const Eigen::Matrix2d rotation = Eigen::Rotation2Dd(reg.yaw).toRotationMatrix();
  reg.translation = target_mean - rotation * source_mean;
  double squared = 0.0;
  for (const auto& pair : pairs) {
    const WorldPoint mapped = reg.apply(pair.source);
    squared += (mapped.x - pair.target.x) * (mapped.x - pair.target.x) +
               (mapped.y - pair.target.y) * (mapped.y - pair.target.y);
  }
  reg.rms_residual = std::sqrt(squared / static_cast<double>(pairs.size()));
  return reg;
}

}  // namespace border_forge
