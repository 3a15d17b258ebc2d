#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <json.hpp>

#include "momapos/geometry.hpp"

namespace momapos {

using JointVector = Eigen::VectorXd;

/// One revolute joint in standard Denavit-Hartenberg form:
/// Rz(q + theta_offset) * Tz(d) * Tx(a) * Rx(alpha).
struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
  double q_lo = -3.141592653589793;
  double q_hi = 3.141592653589793;
};

/// Planar base pose; yaw in (-pi, pi].
struct BasePose {
  Vec2 xy = Vec2::Zero();
  double yaw = 0.0;
};

/// Mobile manipulator: box base (r^x, r^y, r^z), a body column of height r^h
/// and a serial arm mounted at the base center on top of the body.
class RobotModel {
 public:
  RobotModel(std::string name, Vec3 base_dims, double body_height, std::vector<DhRow> arm);

  const std::string& name() const { return name_; }
  const Vec3& base_dims() const { return base_dims_; }
  double body_height() const { return body_height_; }
  const std::vector<DhRow>& arm() const { return arm_; }
  int dof() const { return static_cast<int>(arm_.size()); }
  /// Height of the arm base above the floor, r^z + r^h.
  double mount_height() const { return base_dims_.z() + body_height_; }
  /// Arm extension r^l, computed once with the default joint grid.
  double reach() const { return reach_; }

  bool within_limits(const JointVector& q, double tol = 1e-12) const;
  JointVector clamp(const JointVector& q) const;
  JointVector lower_limits() const;
  JointVector upper_limits() const;
  /// Mid-range of every joint.
  JointVector home() const;
  /// Footprint box centered at the origin, z in [0, r^z].
  Aabb footprint_box() const;
  OrientedRect footprint_at(const BasePose& pose) const;

 private:
  std::string name_;
  Vec3 base_dims_;
  double body_height_;
  std::vector<DhRow> arm_;
  double reach_ = 0.0;
};

RobotModel parse_robot(const nlohmann::json& doc);
RobotModel load_robot(const std::filesystem::path& path);
nlohmann::json robot_to_json(const RobotModel& robot);

/// Shipped models: "generic6" (default), "short6", "tall6", "planar2".
RobotModel robot_preset(const std::string& name);
std::vector<std::string> robot_preset_names();

/// Frames 0..n of the chain in the arm-base frame; no limit check.
std::vector<Eigen::Isometry3d> link_frames(const RobotModel& robot, const JointVector& q);

/// End-effector pose in the arm-base frame. Throws JointLimitError.
Eigen::Isometry3d forward_kinematics(const RobotModel& robot, const JointVector& q);

/// End-effector position without limit checks (hot loops).
Vec3 end_effector_position(const RobotModel& robot, const JointVector& q);

/// Max end-effector distance from the arm base over the joint grids with 2 up
/// to `samples_per_joint` values per joint, coarsened until their combined
/// size is at most `max_total`. Nondecreasing in `samples_per_joint`.
double arm_reach(const RobotModel& robot, int samples_per_joint = 7,
                 std::size_t max_total = 1'000'000);

/// Horizontal reach sqrt(r_l^2 - (target_z - r_z - r_h)^2) for a base whose
/// top sits at base_z. Throws OutOfVerticalReach.
double delta_r(const RobotModel& robot, double base_z, double target_z);
double delta_r(double reach, double vertical_offset);

struct IkParams {
  double tol = 0.01;
  int restarts = 10;
  int max_iters = 200;
  double damping = 0.05;
  std::uint64_t seed = 0;
};

/// Position-only damped-least-squares IK. The first attempt starts from
/// `initial` when given, the rest from seeded random configurations.
/// `accept` can reject converged solutions (for example in collision).
std::optional<JointVector> solve_ik(
    const RobotModel& robot, const Vec3& target, const IkParams& params,
    const std::optional<JointVector>& initial = std::nullopt,
    const std::function<bool(const JointVector&)>& accept = nullptr);

/// Arm-base frame (world <- arm) for a base pose.
Eigen::Isometry3d arm_base_frame(const RobotModel& robot, const BasePose& pose);

/// Yaw that points the base at `target`.
double yaw_facing(const Vec2& from, const Vec2& target);

}  // namespace momapos
