#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "border_forge/gridmap.hpp"

namespace border_forge {

// Rigid transform in SE(3). Maps points from a child frame into its parent:
// p_parent = rotation * p_child + translation.
struct Pose3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose3 identity() { return {}; }
  static Pose3 from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy);
  static Pose3 planar(double x, double y, double yaw);

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Pose3 inverse() const;
  bool is_valid(double tolerance = 1e-9) const;
};

// (a ∘ b)(p) = a(b(p)).
Pose3 compose(const Pose3& a, const Pose3& b);

// Largest absolute entry of the 4x4 homogeneous difference.
double pose_distance(const Pose3& a, const Pose3& b);

namespace frame_names {
inline constexpr const char* kMap = "Map";
inline constexpr const char* kAdf = "ADF";
inline constexpr const char* kSos = "SoS";
inline constexpr const char* kTango = "Tango";
inline constexpr const char* kRobot = "Robot";
}  // namespace frame_names

// Named frames joined by parent->child transforms. Edges form a forest.
// Writers are serialized; lookups take a shared lock and see a consistent graph.
class FrameGraph {
 public:
  // Starts with Map, ADF, SoS, Tango and Robot and no edges.
  FrameGraph();
  FrameGraph(const FrameGraph& other);
  FrameGraph& operator=(const FrameGraph& other);

  void add_frame(const std::string& name);
  bool has_frame(const std::string& name) const;
  std::vector<std::string> frames() const;

  // Adds parent->child, or updates the transform when that exact edge exists.
  // Rejects a second parent for `child` and edges that would close a cycle.
  void set_edge(const std::string& parent, const std::string& child, const Pose3& parent_from_child);
  void remove_edge(const std::string& child);

  // Transform taking points expressed in `from` into `to`.
  Pose3 lookup_transform(const std::string& from, const std::string& to) const;

 private:
  struct Edge {
    std::string parent;
    Pose3 parent_from_child;
  };

  // Chain of frames from `name` up to its root, inclusive.
  std::vector<std::string> ancestry(const std::string& name) const;

  mutable std::shared_mutex mutex_;
  std::vector<std::string> frames_;
  std::map<std::string, Edge> parent_of_;
};

// Each YAML entry: {parent, child, xyz: [x,y,z], rpy: [roll,pitch,yaw]}.
FrameGraph load_frame_graph(const std::filesystem::path& path);
FrameGraph parse_frame_graph(const std::string& yaml_text);

struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();

  // Normalizes `direction`; throws kInvalidArgument on a zero vector.
  static Ray make(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction);
};

// Casts a Tango-frame ray onto the Map ground plane z = 0.
WorldPoint ray_ground_intersection(const FrameGraph& graph, const Ray& ray_in_tango);

struct Correspondence {
  WorldPoint source;  // ADF frame
  WorldPoint target;  // Map frame
};

struct Registration {
  double yaw = 0.0;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  double rms_residual = 0.0;

  Pose3 pose() const { return Pose3::planar(translation.x(), translation.y(), yaw); }
  WorldPoint apply(WorldPoint p) const;
};

// Least-squares planar rigid transform (no scale) taking sources onto targets.
Registration estimate_registration(const std::vector<Correspondence>& pairs);

}  // namespace border_forge
