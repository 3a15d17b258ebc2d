#include "momapos/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "momapos/errors.hpp"
#include "momapos/occupancy.hpp"
#include "momapos/random.hpp"

namespace momapos {

namespace {

// What the baselines know about the scene: object boxes, no door sweeps.
struct StaticWorld {
  std::vector<Rect2> rects;
  OccupancyGrid grid;
  std::vector<std::uint8_t> reachable;

  StaticWorld(const Scene& scene, const RobotModel& robot, double resolution)
      : grid(make_grid(scene, robot, resolution, rects)) {
    reachable.assign(static_cast<std::size_t>(grid.nx()) * grid.ny(), 0);
    if (const auto sc = grid.cell_at(scene.start()); sc && !grid.occupied(*sc)) reachable = grid.reachable_from(*sc);
  }

  static OccupancyGrid make_grid(const Scene& scene, const RobotModel& robot, double res, std::vector<Rect2>& rects) {
    for (const auto& o : scene.objects()) rects.push_back(footprint(o.bbox));
    return rasterize_footprints(scene.floor(), rects, res, footprint_radius(robot.footprint_box()));
  }

  bool free(const Scene& scene, const RobotModel& robot, const BasePose& pose) const {
    const OrientedRect fp = robot.footprint_at(pose);
    const Rect2 b = fp.bounds();
    if (!scene.floor().contains(b.min, 1e-9) || !scene.floor().contains(b.max, 1e-9)) return false;
    return std::none_of(rects.begin(), rects.end(), [&](const Rect2& r) { return overlaps(fp, r); });
  }

  // Reachable from the start on the disc-model grid the verifier also uses.
  bool navigable(const Vec2& xy) const {
    const auto c = grid.cell_at(xy);
    return c && reachable[grid.index(*c)];
  }
};

// Target-anchored lattice, optionally clipped to a disc.
std::vector<Vec2> lattice(const Vec2& center, double cell, double radius) {
  const int n = static_cast<int>(std::floor(radius / cell + 1e-9));
  std::vector<Vec2> out;
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      const Vec2 p = center + cell * Vec2(i, j);
      if ((p - center).norm() <= radius) out.push_back(p);
    }
  }
  return out;
}

std::optional<BasePose> nearest_navigable(const Scene& scene, const RobotModel& robot, const StaticWorld& world,
                                          const Vec2& target, double cell, double radius, BaselineResult& res) {
  auto cells = lattice(target, cell, radius);
  std::stable_sort(cells.begin(), cells.end(),
                   [&](const Vec2& a, const Vec2& b) { return (a - target).norm() < (b - target).norm(); });
  for (const auto& xy : cells) {
    const BasePose pose{xy, yaw_facing(xy, target)};
    if (!world.navigable(xy) || !world.free(scene, robot, pose)) continue;
    res.tried.push_back(xy);
    res.tried_scores.push_back(0.0);
    return pose;
  }
  return std::nullopt;
}

FeasibilityResult manipulation(const Scene& scene, const RobotModel& robot, const TargetSpec& target,
                               const BasePose& pose, const PlannerConfig& config) {
  FeasibilityParams fp = config.feasibility;
  fp.seed = candidate_seed(config.feasibility.seed, pose.xy);
  return check_manipulation_feasibility(robot, pose, target, scene, scene.all_ids(), fp);
}

double reach_radius(const RobotModel& robot, const Vec3& target) {
  return delta_r(robot, robot.base_dims().z(), target.z());
}

}  // namespace

BaselineResult habitat_placement(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                 const BaselineParams& params) {
  const ObjectInstance& obj = scene.at(target_id);
  BaselineResult res;
  const StaticWorld world(scene, robot, params.cell);
  const Vec2 target = obj.position.head<2>();
  if (!obj.articulated()) {
    const Vec2 ext = scene.floor().max - scene.floor().min;
    res.pose = nearest_navigable(scene, robot, world, target, params.cell, ext.norm(), res);
    if (!res.pose) res.reason = "no navigable free cell";
    return res;
  }
  // The door panel marks the front face: its thin side.
  const Aabb& panel = obj.joint->panel_home;
  const Vec3 pe = panel.extents();
  const int axis = pe.x() < pe.y() ? 0 : 1;
  const int other = 1 - axis;
  const double sign = panel.center()[axis] < obj.bbox.center()[axis] ? -1.0 : 1.0;
  Vec2 face;
  face[axis] = sign < 0 ? obj.bbox.min[axis] : obj.bbox.max[axis];
  face[other] = obj.bbox.center()[other];
  Vec2 normal = Vec2::Zero();
  normal[axis] = sign;
  const Vec2 xy = face + params.habitat_standoff * normal;
  const BasePose pose{xy, yaw_facing(xy, target)};
  res.tried.push_back(xy);
  res.tried_scores.push_back(0.0);
  if (!world.free(scene, robot, pose)) {
    res.reason = "offset pose collides with static geometry";
    return res;
  }
  res.pose = pose;
  return res;
}

BaselineResult m3star_placement(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                std::uint64_t seed, const PlannerConfig& config, const BaselineParams& params) {
  const TargetSpec target = make_target(scene, target_id, config.waypoint_count);
  const Vec2 center = target.position.head<2>();
  const double radius = reach_radius(robot, target.position);
  const StaticWorld world(scene, robot, params.cell);
  BaselineResult res;
  if (!target.articulated) {
    res.pose = nearest_navigable(scene, robot, world, center, params.cell, radius, res);
    if (!res.pose) res.reason = "no navigable cell within reach";
    return res;
  }
  auto cells = lattice(center, params.cell, radius);
  Rng rng(seed);
  const std::size_t draws = std::min(cells.size(), static_cast<std::size_t>(std::max(0, params.trial_budget)));
  for (std::size_t k = 0; k < draws; ++k) {
    // Partial shuffle: draw uniformly among the cells not yet tried.
    std::swap(cells[k], cells[k + rng.index(cells.size() - k)]);
    const Vec2 xy = cells[k];
    res.tried.push_back(xy);
    res.tried_scores.push_back(0.0);
    const BasePose pose{xy, yaw_facing(xy, center)};
    if (!world.navigable(xy) || !world.free(scene, robot, pose)) continue;
    if (manipulation(scene, robot, target, pose, config).feasible) {
      res.pose = pose;
      return res;
    }
  }
  res.reason = "trial budget exhausted";
  return res;
}

BaselineResult reuleaux_placement(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                  const ReachabilityMap& irm, std::uint64_t seed, const PlannerConfig& config,
                                  const BaselineParams& params) {
  const TargetSpec target = make_target(scene, target_id, config.waypoint_count);
  const Vec2 center = target.position.head<2>();
  const double radius = reach_radius(robot, target.position);
  const StaticWorld world(scene, robot, params.cell);
  BaselineResult res;

  auto cells = lattice(center, params.cell, radius);
  Rng rng(seed);
  for (std::size_t i = cells.size(); i > 1; --i) std::swap(cells[i - 1], cells[rng.index(i)]);
  std::vector<double> score(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    score[i] = irm_query(irm, BasePose{cells[i], yaw_facing(cells[i], center)}, robot.mount_height(), target.position);
  }
  std::vector<std::size_t> rank(cells.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

  int checks = 0;
  for (std::size_t i : rank) {
    if (checks >= params.trial_budget || score[i] <= 0.0) break;
    const BasePose pose{cells[i], yaw_facing(cells[i], center)};
    if (!world.navigable(cells[i]) || !world.free(scene, robot, pose)) continue;
    ++checks;
    res.tried.push_back(cells[i]);
    res.tried_scores.push_back(score[i]);
    if (manipulation(scene, robot, target, pose, config).feasible) {
      res.pose = pose;
      return res;
    }
  }
  res.reason = checks >= params.trial_budget ? "trial budget exhausted" : "no reachable cell";
  return res;
}

}  // namespace momapos
