#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "momapos/kinematics.hpp"
#include "momapos/occupancy.hpp"
#include "momapos/placement.hpp"
#include "momapos/scene.hpp"

namespace momapos {

// ---------------------------------------------------------------------------
// Navigation

enum class NavStatus { ok, no_path, start_occupied, goal_occupied };

struct NavPath {
  NavStatus status = NavStatus::no_path;
  /// Cell centers from start to goal.
  std::vector<Vec2> points;
  double length = 0.0;

  bool found() const { return status == NavStatus::ok; }
};

/// A* over 8-connected free cells with Euclidean step costs and a
/// straight-line heuristic. Start and goal must lie inside the grid.
NavPath nav_path(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal);

const char* to_string(NavStatus s);

// ---------------------------------------------------------------------------
// Arm collision model

/// Box in its own frame plus the transform from world into that frame.
struct OrientedBox {
  Aabb box;
  Eigen::Isometry3d to_box = Eigen::Isometry3d::Identity();

  bool contains(const Vec3& p) const { return box.contains(to_box * p); }
};

/// The door panel of an articulated object opened by theta, exactly.
OrientedBox panel_at(const ObjectInstance& obj, double theta);

/// Link-point collision model of the arm at a fixed base. Links are sampled
/// along the DH chain at <= `point_spacing`. Points within `tool_length` of
/// the end effector (measured along the chain) ignore `tool_ok` obstacles,
/// which is how the gripper is allowed to touch the object it manipulates.
/// Points within `distal_length` ignore the door panel's later poses: that
/// part of the arm moves along with the door, so only base-proximal links
/// have to stay out of its way.
class ArmCollisionModel {
 public:
  ArmCollisionModel(const RobotModel& robot, const Eigen::Isometry3d& arm_base, std::vector<Aabb> obstacles,
                    std::vector<Aabb> tool_ok, std::vector<OrientedBox> panels = {},
                    double point_spacing = 0.02, double tool_length = 0.1, double distal_length = 0.35);

  /// World-frame link points for q and their distance along the chain to
  /// the end effector.
  void link_points(const JointVector& q, std::vector<Vec3>& points, std::vector<double>& to_end) const;
  bool config_free(const JointVector& q) const;
  /// Checks interpolated configurations with at most `joint_step` change per joint.
  bool motion_free(const JointVector& from, const JointVector& to, double joint_step = 0.02) const;

  const RobotModel& robot() const { return robot_; }

 private:
  const RobotModel& robot_;
  Eigen::Isometry3d arm_base_;
  std::vector<Aabb> obstacles_;
  std::vector<Aabb> tool_ok_;
  std::vector<OrientedBox> panels_;
  double point_spacing_;
  double tool_length_;
  double distal_length_;
};

// ---------------------------------------------------------------------------
// Joint-space RRT

struct RrtParams {
  double step = 0.1;
  double goal_bias = 0.1;
  int max_iters = 5000;
  std::uint64_t seed = 0;
  double check_step = 0.02;
};

struct ArmTrajectory {
  std::vector<JointVector> configs;
  std::vector<bool> segment_valid;

  std::size_t size() const { return configs.size(); }
};

/// Goal-biased RRT; goal samples are followed greedily until blocked. Throws
/// InvalidEndpoint for out-of-limit or colliding endpoints; returns nullopt
/// when the iteration budget runs out.
std::optional<ArmTrajectory> arm_rrt(const ArmCollisionModel& model, const JointVector& start,
                                     const JointVector& goal, const RrtParams& params);

// ---------------------------------------------------------------------------
// Manipulation feasibility

struct FeasibilityParams {
  IkParams ik;
  RrtParams rrt;
  double point_spacing = 0.02;
  double tool_length = 0.1;
  double distal_length = 0.35;
  std::uint64_t seed = 0;
};

struct FeasibilityResult {
  bool feasible = false;
  /// Waypoint index where the check failed; -1 on success.
  int failed_waypoint = -1;
  std::string reason;
  ArmTrajectory trajectory;
  std::vector<JointVector> waypoint_configs;
};

/// Obstacles the arm and base must avoid while the hand is at waypoint j.
/// The target's own door panel is dropped for angles up to theta_j and kept
/// for later angles: exact panels for the arm, their bounding boxes for the
/// base.
struct WaypointObstacles {
  std::vector<Aabb> hard;
  std::vector<Aabb> tool_ok;
  std::vector<OrientedBox> panels;
  std::vector<Aabb> panel_bounds;
};

WaypointObstacles waypoint_obstacles(const Scene& scene, const ObjectSet& subset, const TargetSpec& target,
                                     std::size_t waypoint);

/// Base footprint clear of everything, IK for every waypoint, and RRT
/// segments chained from the home configuration through the waypoints.
FeasibilityResult check_manipulation_feasibility(const RobotModel& robot, const BasePose& base,
                                                 const TargetSpec& target, const Scene& scene,
                                                 const ObjectSet& subset, const FeasibilityParams& params);

void write_trajectory_csv(const ArmTrajectory& traj, const std::filesystem::path& path);
void write_path_csv(const NavPath& path, const std::filesystem::path& file);

}  // namespace momapos
