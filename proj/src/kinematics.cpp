#include "momapos/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"

namespace momapos {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

Eigen::Isometry3d dh_transform(const DhRow& row, double q) {
  const double th = q + row.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() << ct, -st * ca, st * sa,
                st, ct * ca, -ct * sa,
                0.0, sa, ca;
  t.translation() << row.a * ct, row.a * st, row.d;
  return t;
}

}  // namespace

RobotModel::RobotModel(std::string name, Vec3 base_dims, double body_height, std::vector<DhRow> arm)
    : name_(std::move(name)), base_dims_(base_dims), body_height_(body_height), arm_(std::move(arm)) {
  if ((base_dims_.array() <= 0.0).any() || !(body_height_ > 0.0)) {
    throw ValidationError("robot '" + name_ + "': dimensions must be positive");
  }
  if (arm_.size() < 2) throw ValidationError("robot '" + name_ + "': arm needs at least 2 joints");
  for (const auto& row : arm_) {
    if (!(row.q_lo < row.q_hi)) throw ValidationError("robot '" + name_ + "': empty joint range");
  }
  reach_ = arm_reach(*this);
}

bool RobotModel::within_limits(const JointVector& q, double tol) const {
  if (q.size() != dof()) return false;
  for (int i = 0; i < dof(); ++i) {
    if (q[i] < arm_[i].q_lo - tol || q[i] > arm_[i].q_hi + tol) return false;
  }
  return true;
}

JointVector RobotModel::clamp(const JointVector& q) const {
  JointVector out = q;
  for (int i = 0; i < dof(); ++i) out[i] = std::clamp(q[i], arm_[i].q_lo, arm_[i].q_hi);
  return out;
}

JointVector RobotModel::lower_limits() const {
  JointVector v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = arm_[i].q_lo;
  return v;
}

JointVector RobotModel::upper_limits() const {
  JointVector v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = arm_[i].q_hi;
  return v;
}

JointVector RobotModel::home() const { return 0.5 * (lower_limits() + upper_limits()); }

Aabb RobotModel::footprint_box() const {
  const Vec3 h(0.5 * base_dims_.x(), 0.5 * base_dims_.y(), 0.0);
  return Aabb{-h, Vec3(h.x(), h.y(), base_dims_.z())};
}

OrientedRect RobotModel::footprint_at(const BasePose& pose) const {
  return OrientedRect{pose.xy, 0.5 * base_dims_.head<2>(), pose.yaw};
}

RobotModel parse_robot(const json& doc) {
  try {
    const json& base = doc.at("base");
    const Vec3 dims(base.at(0).get<double>(), base.at(1).get<double>(), base.at(2).get<double>());
    const json& dh = doc.at("dh");
    const json& limits = doc.at("limits");
    if (dh.size() != limits.size()) throw ParseError("robot: dh and limits differ in length");
    std::vector<DhRow> rows;
    for (std::size_t i = 0; i < dh.size(); ++i) {
      DhRow r;
      r.a = dh[i].at(0).get<double>();
      r.alpha = dh[i].at(1).get<double>();
      r.d = dh[i].at(2).get<double>();
      r.theta_offset = dh[i].at(3).get<double>();
      r.q_lo = limits[i].at(0).get<double>();
      r.q_hi = limits[i].at(1).get<double>();
      rows.push_back(r);
    }
    return RobotModel(doc.value("name", "robot"), dims, doc.at("body_height").get<double>(),
                      std::move(rows));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed robot description: ") + e.what());
  }
}

RobotModel load_robot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open robot file " + path.string());
  try {
    return parse_robot(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json robot_to_json(const RobotModel& robot) {
  json dh = json::array(), limits = json::array();
  for (const auto& r : robot.arm()) {
    dh.push_back({r.a, r.alpha, r.d, r.theta_offset});
    limits.push_back({r.q_lo, r.q_hi});
  }
  const Vec3& b = robot.base_dims();
  return {{"name", robot.name()},
          {"base", {b.x(), b.y(), b.z()}},
          {"body_height", robot.body_height()},
          {"dh", dh},
          {"limits", limits}};
}

namespace {

// Anthropomorphic arm with a spherical wrist. Mid-range of every joint is the
// upright pose: upper arm, forearm and hand stacked vertically.
std::vector<DhRow> anthropomorphic(double upper, double fore, double hand) {
  const double elbow_mid = kPi / 2.0;
  return {
      {0.0, kPi / 2.0, 0.0, 0.0, -kPi, kPi},
      {upper, 0.0, 0.0, 0.0, -kPi / 6.0, 7.0 * kPi / 6.0},
      {0.0, kPi / 2.0, 0.0, 0.0, elbow_mid - 2.6, elbow_mid + 2.6},
      {0.0, -kPi / 2.0, fore, 0.0, -kPi, kPi},
      {0.0, kPi / 2.0, 0.0, 0.0, -2.2, 2.2},
      {0.0, 0.0, hand, 0.0, -kPi, kPi},
  };
}

}  // namespace

RobotModel robot_preset(const std::string& name) {
  if (name == "generic6") {
    return RobotModel("generic6", Vec3(0.5, 0.5, 0.3), 0.6, anthropomorphic(0.5, 0.45, 0.1));
  }
  if (name == "short6") {
    return RobotModel("short6", Vec3(0.45, 0.45, 0.25), 0.55, anthropomorphic(0.4, 0.35, 0.08));
  }
  if (name == "tall6") {
    return RobotModel("tall6", Vec3(0.6, 0.6, 0.35), 0.85, anthropomorphic(0.55, 0.5, 0.1));
  }
  if (name == "planar2") {
    return RobotModel("planar2", Vec3(0.4, 0.4, 0.2), 0.3,
                      {{0.5, 0.0, 0.0, 0.0, -kPi, kPi}, {0.5, 0.0, 0.0, 0.0, -kPi, kPi}});
  }
  throw ValidationError("unknown robot preset '" + name + "'");
}

std::vector<std::string> robot_preset_names() { return {"generic6", "short6", "tall6", "planar2"}; }

std::vector<Eigen::Isometry3d> link_frames(const RobotModel& robot, const JointVector& q) {
  std::vector<Eigen::Isometry3d> frames;
  frames.reserve(robot.dof() + 1);
  frames.push_back(Eigen::Isometry3d::Identity());
  for (int i = 0; i < robot.dof(); ++i) frames.push_back(frames.back() * dh_transform(robot.arm()[i], q[i]));
  return frames;
}

Eigen::Isometry3d forward_kinematics(const RobotModel& robot, const JointVector& q) {
  if (q.size() != robot.dof()) throw std::invalid_argument("joint vector has wrong size");
  if (!robot.within_limits(q)) throw JointLimitError("joint vector outside limits");
  return link_frames(robot, q).back();
}

Vec3 end_effector_position(const RobotModel& robot, const JointVector& q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < robot.dof(); ++i) t = t * dh_transform(robot.arm()[i], q[i]);
  return t.translation();
}

double arm_reach(const RobotModel& robot, int samples_per_joint, std::size_t max_total) {
  const int n = robot.dof();
  // Union of the grids with 2..s values per joint; the union grows with s, so
  // the maximum never drops as the grid gets denser.
  auto union_size = [n](int s) {
    double total = 0.0;
    for (int k = 2; k <= s; ++k) total += std::pow(static_cast<double>(k), n);
    return total;
  };
  int s = std::max(2, samples_per_joint);
  while (s > 2 && union_size(s) > static_cast<double>(max_total)) --s;

  double best = 0.0;
  JointVector q(n);
  for (int k = 2; k <= s; ++k) {
    std::vector<int> idx(n, 0);
    while (true) {
      for (int i = 0; i < n; ++i) {
        const auto& r = robot.arm()[i];
        q[i] = r.q_lo + (r.q_hi - r.q_lo) * idx[i] / (k - 1);
      }
      best = std::max(best, end_effector_position(robot, q).norm());
      int j = 0;
      while (j < n && ++idx[j] == k) idx[j++] = 0;
      if (j == n) break;
    }
  }
  return best;
}

double delta_r(double reach, double vertical_offset) {
  const double radicand = reach * reach - vertical_offset * vertical_offset;
  if (std::abs(vertical_offset) > reach || radicand < 0.0) {
    throw OutOfVerticalReach("vertical offset exceeds arm reach");
  }
  return std::sqrt(radicand);
}

double delta_r(const RobotModel& robot, double base_z, double target_z) {
  return delta_r(robot.reach(), std::abs(target_z - base_z - robot.body_height()));
}

std::optional<JointVector> solve_ik(const RobotModel& robot, const Vec3& target, const IkParams& params,
                                    const std::optional<JointVector>& initial,
                                    const std::function<bool(const JointVector&)>& accept) {
  if (!(params.tol > 0.0)) throw std::invalid_argument("IK tolerance must be positive");
  const int n = robot.dof();
  Rng rng(params.seed);
  const JointVector lo = robot.lower_limits(), hi = robot.upper_limits();
  const double lambda2 = params.damping * params.damping;
  constexpr double kMaxStep = 0.5;

  for (int attempt = 0; attempt < params.restarts; ++attempt) {
    JointVector q(n);
    if (attempt == 0 && initial) {
      q = robot.clamp(*initial);
    } else {
      for (int i = 0; i < n; ++i) q[i] = rng.uniform(lo[i], hi[i]);
    }
    for (int it = 0; it <= params.max_iters; ++it) {
      const auto frames = link_frames(robot, q);
      const Vec3 p = frames.back().translation();
      const Vec3 err = target - p;
      if (err.norm() <= params.tol) {
        if (!accept || accept(q)) return q;
        break;
      }
      if (it == params.max_iters) break;
      Eigen::Matrix<double, 3, Eigen::Dynamic> jac(3, n);
      for (int i = 0; i < n; ++i) {
        const Vec3 z = frames[i].linear().col(2);
        jac.col(i) = z.cross(p - frames[i].translation());
      }
      const Eigen::Matrix3d jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix3d::Identity();
      JointVector dq = jac.transpose() * jjt.ldlt().solve(err);
      const double m = dq.cwiseAbs().maxCoeff();
      if (m > kMaxStep) dq *= kMaxStep / m;
      q = robot.clamp(q + dq);
    }
  }
  return std::nullopt;
}

Eigen::Isometry3d arm_base_frame(const RobotModel& robot, const BasePose& pose) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = Eigen::AngleAxisd(pose.yaw, Vec3::UnitZ()).toRotationMatrix();
  t.translation() << pose.xy.x(), pose.xy.y(), robot.mount_height();
  return t;
}

double yaw_facing(const Vec2& from, const Vec2& target) {
  const Vec2 d = target - from;
  if (d.squaredNorm() == 0.0) return 0.0;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

}  // namespace momapos
