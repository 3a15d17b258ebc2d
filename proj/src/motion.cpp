#include "momapos/motion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"

namespace momapos {

const char* to_string(NavStatus s) {
  switch (s) {
    case NavStatus::ok: return "ok";
    case NavStatus::no_path: return "no_path";
    case NavStatus::start_occupied: return "start_occupied";
    case NavStatus::goal_occupied: return "goal_occupied";
  }
  return "unknown";
}

NavPath nav_path(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal) {
  const auto s = grid.cell_at(start);
  const auto g = grid.cell_at(goal);
  if (!s || !g) throw std::invalid_argument("navigation endpoint outside the grid");
  NavPath out;
  if (grid.occupied(*s)) {
    out.status = NavStatus::start_occupied;
    return out;
  }
  if (grid.occupied(*g)) {
    out.status = NavStatus::goal_occupied;
    return out;
  }

  const double res = grid.resolution();
  const std::size_t n = static_cast<std::size_t>(grid.nx()) * grid.ny();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(n, inf);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  auto h = [&](Cell c) { return res * std::hypot(double(c.x - g->x), double(c.y - g->y)); };

  // (f, insertion order, cell index); insertion order keeps ties deterministic.
  using Entry = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::uint64_t order = 0;
  const std::size_t si = grid.index(*s), gi = grid.index(*g);
  cost[si] = 0.0;
  open.emplace(h(*s), order++, si);
  while (!open.empty()) {
    const auto [f, ord, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (idx == gi) break;
    const Cell c{static_cast<int>(idx % grid.nx()), static_cast<int>(idx / grid.nx())};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell nb{c.x + dx, c.y + dy};
        if (!grid.in_bounds(nb) || grid.occupied(nb)) continue;
        const std::size_t ni = grid.index(nb);
        if (closed[ni]) continue;
        const double step = (dx != 0 && dy != 0) ? res * std::numbers::sqrt2 : res;
        const double nc = cost[idx] + step;
        if (nc < cost[ni]) {
          cost[ni] = nc;
          parent[ni] = static_cast<std::int64_t>(idx);
          open.emplace(nc + h(nb), order++, ni);
        }
      }
    }
  }
  if (!closed[gi]) return out;

  std::vector<std::size_t> chain;
  for (std::int64_t i = static_cast<std::int64_t>(gi); i >= 0; i = parent[i]) chain.push_back(static_cast<std::size_t>(i));
  std::reverse(chain.begin(), chain.end());
  for (std::size_t i : chain) {
    out.points.push_back(grid.center(Cell{static_cast<int>(i % grid.nx()), static_cast<int>(i / grid.nx())}));
  }
  out.status = NavStatus::ok;
  out.length = cost[gi];
  return out;
}

// ---------------------------------------------------------------------------

OrientedBox panel_at(const ObjectInstance& obj, double theta) {
  if (!obj.joint) throw NotArticulated("object '" + obj.id + "' is not articulated");
  const JointSpec& j = *obj.joint;
  const Eigen::Isometry3d open =
      Eigen::Translation3d(j.pivot) * Eigen::AngleAxisd(j.signed_angle(theta), j.axis) * Eigen::Translation3d(-j.pivot);
  return OrientedBox{j.panel_home, open.inverse()};
}

ArmCollisionModel::ArmCollisionModel(const RobotModel& robot, const Eigen::Isometry3d& arm_base,
                                     std::vector<Aabb> obstacles, std::vector<Aabb> tool_ok,
                                     std::vector<OrientedBox> panels, double point_spacing, double tool_length,
                                     double distal_length)
    : robot_(robot),
      arm_base_(arm_base),
      point_spacing_(point_spacing),
      tool_length_(tool_length),
      distal_length_(distal_length) {
  if (!(point_spacing > 0.0)) throw std::invalid_argument("point spacing must be positive");
  // Boxes the arm cannot reach from this base never matter.
  const Vec3 origin = arm_base.translation();
  const double r = robot.reach() + point_spacing;
  auto near = [&](const Aabb& b) {
    const Vec3 closest = origin.cwiseMax(b.min).cwiseMin(b.max);
    return (closest - origin).norm() <= r;
  };
  for (auto& b : obstacles) {
    if (near(b)) obstacles_.push_back(b);
  }
  for (auto& b : tool_ok) {
    if (near(b)) tool_ok_.push_back(b);
  }
  for (auto& p : panels) {
    const Eigen::Isometry3d to_world = p.to_box.inverse();
    std::array<Vec3, 8> corners = p.box.corners();
    for (auto& c : corners) c = to_world * c;
    if (near(Aabb::from_points(corners))) panels_.push_back(p);
  }
}

void ArmCollisionModel::link_points(const JointVector& q, std::vector<Vec3>& points,
                                    std::vector<double>& dist) const {
  points.clear();
  dist.clear();
  const auto frames = link_frames(robot_, q);
  // Polyline through every frame origin, with the d offset and the a offset
  // as separate segments.
  std::vector<Vec3> poly;
  poly.push_back(frames[0].translation());
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const auto& row = robot_.arm()[i - 1];
    const Vec3 prev = frames[i - 1].translation();
    const Vec3 elbow = prev + row.d * frames[i - 1].linear().col(2);
    poly.push_back(elbow);
    poly.push_back(frames[i].translation());
  }
  // Distance along the chain from each vertex to the end effector.
  std::vector<double> to_end(poly.size(), 0.0);
  for (std::size_t i = poly.size() - 1; i-- > 0;) to_end[i] = to_end[i + 1] + (poly[i + 1] - poly[i]).norm();

  auto push = [&](const Vec3& p, double d) {
    points.push_back(arm_base_ * p);
    dist.push_back(d);
  };
  push(poly[0], to_end[0]);
  for (std::size_t i = 1; i < poly.size(); ++i) {
    const double len = (poly[i] - poly[i - 1]).norm();
    if (len < 1e-12) continue;
    const int steps = std::max(1, static_cast<int>(std::ceil(len / point_spacing_)));
    for (int k = 1; k <= steps; ++k) {
      const double t = static_cast<double>(k) / steps;
      push(poly[i - 1] + t * (poly[i] - poly[i - 1]), to_end[i] + (1.0 - t) * len);
    }
  }
}

bool ArmCollisionModel::config_free(const JointVector& q) const {
  if (!robot_.within_limits(q, 1e-9)) return false;
  thread_local std::vector<Vec3> points;
  thread_local std::vector<double> dist;
  link_points(q, points, dist);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    if (p.z() < 0.0) return false;
    for (const auto& b : obstacles_) {
      if (b.contains(p)) return false;
    }
    if (dist[i] > tool_length_) {
      for (const auto& b : tool_ok_) {
        if (b.contains(p)) return false;
      }
    }
    if (dist[i] > distal_length_) {
      for (const auto& b : panels_) {
        if (b.contains(p)) return false;
      }
    }
  }
  return true;
}

bool ArmCollisionModel::motion_free(const JointVector& from, const JointVector& to, double joint_step) const {
  const double span = (to - from).cwiseAbs().maxCoeff();
  const int steps = std::max(1, static_cast<int>(std::ceil(span / joint_step)));
  for (int k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    if (!config_free(from + t * (to - from))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::optional<ArmTrajectory> arm_rrt(const ArmCollisionModel& model, const JointVector& start,
                                     const JointVector& goal, const RrtParams& params) {
  const RobotModel& robot = model.robot();
  if (start.size() != robot.dof() || goal.size() != robot.dof()) throw InvalidEndpoint("endpoint has wrong dimension");
  if (!model.config_free(start)) throw InvalidEndpoint("start configuration is out of limits or in collision");
  if (!model.config_free(goal)) throw InvalidEndpoint("goal configuration is out of limits or in collision");
  if (!(params.step > 0.0)) throw std::invalid_argument("RRT step must be positive");

  std::vector<JointVector> nodes{start};
  std::vector<int> parent{-1};
  auto finish = [&](int last) {
    std::vector<JointVector> path;
    for (int i = last; i >= 0; i = parent[i]) path.push_back(nodes[i]);
    std::reverse(path.begin(), path.end());
    ArmTrajectory t;
    t.configs = std::move(path);
    t.segment_valid.assign(t.configs.size() > 0 ? t.configs.size() - 1 : 0, true);
    return t;
  };
  if ((goal - start).norm() < 1e-12) return finish(0);

  auto nearest = [&](const JointVector& q) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - q).squaredNorm();
      if (d < bd) {
        bd = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  };
  // One step from node `from` toward q; returns the new node or -1.
  auto extend = [&](int from, const JointVector& q) {
    const JointVector diff = q - nodes[from];
    const double dist = diff.norm();
    const JointVector next = dist <= params.step ? q : JointVector(nodes[from] + (params.step / dist) * diff);
    if (!model.motion_free(nodes[from], next, params.check_step)) return -1;
    nodes.push_back(next);
    parent.push_back(from);
    return static_cast<int>(nodes.size()) - 1;
  };

  Rng rng(params.seed);
  const JointVector lo = robot.lower_limits(), hi = robot.upper_limits();
  for (int iter = 0; iter < params.max_iters; ++iter) {
    const bool to_goal = iter == 0 || rng.uniform() < params.goal_bias;
    if (to_goal) {
      int cur = nearest(goal);
      while (true) {
        const int next = extend(cur, goal);
        if (next < 0) break;
        if ((nodes[next] - goal).norm() < 1e-12) return finish(next);
        cur = next;
      }
    } else {
      JointVector q(robot.dof());
      for (int k = 0; k < robot.dof(); ++k) q[k] = rng.uniform(lo[k], hi[k]);
      extend(nearest(q), q);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

WaypointObstacles waypoint_obstacles(const Scene& scene, const ObjectSet& subset, const TargetSpec& target,
                                     std::size_t waypoint) {
  WaypointObstacles out;
  for (const auto& o : scene.objects()) {
    if (o.id == target.id) {
      out.tool_ok.push_back(o.bbox);
      if (o.articulated()) {
        for (std::size_t k = waypoint + 1; k < target.angles.size(); ++k) {
          out.panels.push_back(panel_at(o, target.angles[k]));
          out.panel_bounds.push_back(panel_box_at(o, target.angles[k]));
        }
      }
    } else if (subset.count(o.id)) {
      out.hard.push_back(o.bbox);
    }
  }
  return out;
}

FeasibilityResult check_manipulation_feasibility(const RobotModel& robot, const BasePose& base,
                                                 const TargetSpec& target, const Scene& scene,
                                                 const ObjectSet& subset, const FeasibilityParams& params) {
  FeasibilityResult res;
  auto fail = [&](int j, std::string why) {
    res.feasible = false;
    res.failed_waypoint = j;
    res.reason = std::move(why);
    res.trajectory = {};
    return res;
  };
  if (target.waypoints.empty()) throw std::invalid_argument("target has no waypoints");

  // The base stays put for the whole task, so it must clear the most
  // restrictive obstacle set, the one at the first waypoint.
  {
    const OrientedRect fp = robot.footprint_at(base);
    const Rect2 bounds = fp.bounds();
    const Rect2& floor = scene.floor();
    if (!floor.contains(bounds.min, 1e-9) || !floor.contains(bounds.max, 1e-9)) return fail(0, "base leaves the floor");
    const WaypointObstacles obs = waypoint_obstacles(scene, subset, target, 0);
    for (const auto* list : {&obs.hard, &obs.tool_ok, &obs.panel_bounds}) {
      for (const auto& b : *list) {
        if (b.min.z() <= robot.mount_height() && overlaps(fp, footprint(b))) return fail(0, "base collision");
      }
    }
  }

  const Eigen::Isometry3d frame = arm_base_frame(robot, base);
  const Eigen::Isometry3d to_arm = frame.inverse();
  JointVector q_prev = robot.home();
  for (std::size_t j = 0; j < target.waypoints.size(); ++j) {
    const int ji = static_cast<int>(j);
    WaypointObstacles obs = waypoint_obstacles(scene, subset, target, j);
    const ArmCollisionModel model(robot, frame, std::move(obs.hard), std::move(obs.tool_ok), std::move(obs.panels),
                                  params.point_spacing, params.tool_length, params.distal_length);
    if (j == 0 && !model.config_free(q_prev)) return fail(0, "home configuration in collision");

    IkParams ik = params.ik;
    ik.seed = derive_seed(params.seed, {j, 1});
    const Vec3 local = to_arm * target.waypoints[j];
    const auto q = solve_ik(robot, local, ik, q_prev, [&](const JointVector& c) { return model.config_free(c); });
    if (!q) return fail(ji, "no collision-free IK solution");

    RrtParams rrt = params.rrt;
    rrt.seed = derive_seed(params.seed, {j, 2});
    const auto seg = arm_rrt(model, q_prev, *q, rrt);
    if (!seg) return fail(ji, "no arm trajectory");

    const std::size_t skip = res.trajectory.configs.empty() ? 0 : 1;
    for (std::size_t k = skip; k < seg->configs.size(); ++k) res.trajectory.configs.push_back(seg->configs[k]);
    res.waypoint_configs.push_back(*q);
    q_prev = *q;
  }
  res.trajectory.segment_valid.assign(res.trajectory.configs.size() - 1, true);
  res.feasible = true;
  return res;
}

void write_trajectory_csv(const ArmTrajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const int dof = traj.configs.empty() ? 0 : static_cast<int>(traj.configs.front().size());
  out << "step";
  for (int k = 0; k < dof; ++k) out << ",q" << k + 1;
  out << '\n';
  for (std::size_t i = 0; i < traj.configs.size(); ++i) {
    out << i;
    for (int k = 0; k < dof; ++k) out << ',' << traj.configs[i][k];
    out << '\n';
  }
}

void write_path_csv(const NavPath& path, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "x,y\n";
  for (const auto& p : path.points) out << p.x() << ',' << p.y() << '\n';
}

}  // namespace momapos
