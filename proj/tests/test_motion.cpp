#include <doctest.h>

#include <cmath>
#include <numbers>
#include <queue>

#include "momapos/baselines.hpp"
#include "momapos/errors.hpp"
#include "momapos/motion.hpp"
#include "momapos/placement.hpp"
#include "momapos/search.hpp"
#include "support.hpp"

using namespace momapos;
using std::numbers::pi;

namespace {

// Uniform-cost search over the same 8-connected moves.
double dijkstra_length(const OccupancyGrid& g, Cell s, Cell t) {
  std::vector<double> dist(static_cast<std::size_t>(g.nx()) * g.ny(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.index(s)] = 0.0;
  pq.emplace(0.0, g.index(s));
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const Cell c{static_cast<int>(i % g.nx()), static_cast<int>(i / g.nx())};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Cell n{c.x + dx, c.y + dy};
        if ((dx == 0 && dy == 0) || !g.in_bounds(n) || g.occupied(n)) continue;
        const double nd = d + g.resolution() * std::hypot(dx, dy);
        if (nd < dist[g.index(n)]) {
          dist[g.index(n)] = nd;
          pq.emplace(nd, g.index(n));
        }
      }
    }
  }
  return dist[g.index(t)];
}

// Planar two-link arm at the world origin, arm base at height h; dense
// 5 mm link samples against one box.
bool planar_hits(const JointVector& q, double h, const Aabb& box) {
  const Vec3 base(0, 0, h);
  const Vec3 elbow = base + 0.5 * Vec3(std::cos(q[0]), std::sin(q[0]), 0);
  const Vec3 tip = elbow + 0.5 * Vec3(std::cos(q[0] + q[1]), std::sin(q[0] + q[1]), 0);
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    if (box.contains(base + t * (elbow - base)) || box.contains(elbow + t * (tip - elbow))) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("nav: straight line on an empty grid") {
  const OccupancyGrid g(Vec2(0, 0), 0.05, 40, 40);
  const NavPath p = nav_path(g, g.center({5, 5}), g.center({15, 5}));
  REQUIRE(p.found());
  CHECK(p.length == doctest::Approx(10 * 0.05).epsilon(1e-12));
  CHECK(p.points.front() == g.center({5, 5}));
  CHECK(p.points.back() == g.center({15, 5}));
  CHECK_THROWS_AS(nav_path(g, Vec2(-1, 0), g.center({1, 1})), std::invalid_argument);
}

TEST_CASE("nav: sealed goal and occupied endpoints") {
  OccupancyGrid g(Vec2(0, 0), 0.1, 20, 20);
  for (int x = 8; x <= 12; ++x) {
    g.set_occupied({x, 8}, true);
    g.set_occupied({x, 12}, true);
  }
  for (int y = 8; y <= 12; ++y) {
    g.set_occupied({8, y}, true);
    g.set_occupied({12, y}, true);
  }
  CHECK(nav_path(g, g.center({1, 1}), g.center({10, 10})).status == NavStatus::no_path);
  CHECK(nav_path(g, g.center({8, 8}), g.center({1, 1})).status == NavStatus::start_occupied);
  CHECK(nav_path(g, g.center({1, 1}), g.center({8, 9})).status == NavStatus::goal_occupied);
}

TEST_CASE("nav: L-shaped corridor matches a uniform-cost search oracle") {
  OccupancyGrid g(Vec2(0, 0), 0.05, 30, 30);
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 30; ++x) {
      const bool corridor = (y >= 2 && y <= 4 && x >= 2 && x <= 25) || (x >= 23 && x <= 25 && y >= 2 && y <= 27);
      g.set_occupied({x, y}, !corridor);
    }
  }
  const NavPath p = nav_path(g, g.center({2, 3}), g.center({24, 27}));
  REQUIRE(p.found());
  CHECK(p.length == doctest::Approx(dijkstra_length(g, {2, 3}, {24, 27})).epsilon(1e-12));
  for (const Vec2& pt : p.points) CHECK_FALSE(g.occupied(*g.cell_at(pt)));
}

TEST_CASE("rrt: trivial and obstacle-free queries") {
  const RobotModel r = robot_preset("generic6");
  const ArmCollisionModel free_model(r, Eigen::Isometry3d(Eigen::Translation3d(0, 0, r.mount_height())), {}, {});
  RrtParams p;
  p.seed = 1;
  const JointVector home = r.home();
  const auto same = arm_rrt(free_model, home, home, p);
  REQUIRE(same.has_value());
  CHECK(same->size() == 1);

  JointVector goal = home;
  goal[0] += 0.8;
  goal[2] -= 0.5;
  p.max_iters = 5;
  const auto direct = arm_rrt(free_model, home, goal, p);
  REQUIRE(direct.has_value());
  CHECK(direct->configs.front() == home);
  CHECK(direct->configs.back() == goal);

  JointVector bad = home;
  bad[1] = 10.0;
  CHECK_THROWS_AS(arm_rrt(free_model, home, bad, p), InvalidEndpoint);
}

TEST_CASE("rrt: detour around a box passes a finer independent re-check") {
  const RobotModel r = robot_preset("planar2");
  const double h = r.mount_height();
  const Aabb box{Vec3(0.7, -0.1, h - 0.1), Vec3(0.9, 0.1, h + 0.1)};
  const ArmCollisionModel model(r, Eigen::Isometry3d(Eigen::Translation3d(0, 0, h)), {box}, {}, {}, 0.02);
  const JointVector start = Eigen::Vector2d(-1.2, 0.0), goal = Eigen::Vector2d(1.2, 0.0);
  // The straight joint-space line sweeps the extended arm through the box.
  CHECK_FALSE(model.motion_free(start, goal));
  RrtParams p;
  p.seed = 2;
  const auto traj = arm_rrt(model, start, goal, p);
  REQUIRE(traj.has_value());
  CHECK(traj->configs.front() == start);
  CHECK(traj->configs.back() == goal);
  int collisions = 0;
  for (std::size_t i = 1; i < traj->size(); ++i) {
    const JointVector& a = traj->configs[i - 1];
    const JointVector& b = traj->configs[i];
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).cwiseAbs().maxCoeff() / 0.01)));
    for (int k = 0; k <= steps; ++k) collisions += planar_hits(a + (b - a) * (double(k) / steps), h, box);
  }
  CHECK(collisions == 0);
}

TEST_CASE("feasibility: reachable and unreachable single waypoints") {
  const RobotModel r = robot_preset("generic6");
  const Scene s({make_box("apple", Vec3(2.45, 2.45, 0.8), Vec3(2.55, 2.55, 0.9))}, {}, Rect2{Vec2(0, 0), Vec2(5, 5)});
  const TargetSpec t = make_target(s, "apple");
  FeasibilityParams p;
  p.seed = 3;
  const BasePose near{Vec2(1.9, 2.5), 0.0};
  const FeasibilityResult ok = check_manipulation_feasibility(r, near, t, s, s.all_ids(), p);
  CHECK(ok.feasible);
  CHECK(ok.failed_waypoint == -1);
  CHECK(ok.waypoint_configs.size() == 1);
  CHECK((forward_kinematics(r, ok.waypoint_configs[0]).translation() -
         arm_base_frame(r, near).inverse() * t.position)
            .norm() <= p.ik.tol);

  const BasePose far{Vec2(0.5, 2.5), 0.0};
  const FeasibilityResult no = check_manipulation_feasibility(r, far, t, s, s.all_ids(), p);
  CHECK_FALSE(no.feasible);
  CHECK(no.failed_waypoint == 0);
}

TEST_CASE("feasibility: fridge door sweep blocks the frontal pose but not the map maximum") {
  const RobotModel robot = robot_preset("generic6");
  const ReachabilityMap& irm = test::shared_irm("generic6");
  PlannerConfig cfg;
  apply_seed(cfg, 4);
  for (int v = 0; v < 4; ++v) {
    const Scene s = fridge_fixture(v);
    const TargetSpec t = make_target(s, kFridgeTarget);
    const ObjectSet all = s.all_ids();

    const BaselineResult frontal = habitat_placement(s, robot, kFridgeTarget);
    REQUIRE(frontal.pose.has_value());
    FeasibilityParams fp = cfg.feasibility;
    fp.seed = candidate_seed(cfg.feasibility.seed, frontal.pose->xy);
    CHECK_FALSE(check_manipulation_feasibility(robot, *frontal.pose, t, s, all, fp).feasible);

    const CandidateArea area = candidate_area(s, all, robot, t.position);
    const PotentialMap map =
        potential_map(area, irm, robot, t.waypoints, 0.05, cfg.weights, collect_obstacles(s, all, kFridgeTarget));
    const BasePose best = area.pose_at(map.best()->xy);
    fp.seed = candidate_seed(cfg.feasibility.seed, best.xy);
    CHECK(check_manipulation_feasibility(robot, best, t, s, all, fp).feasible);
  }
}

TEST_CASE("feasibility: later door panels are exact boxes") {
  const Scene s = fridge_fixture(0);
  const ObjectInstance& f = s.at(kFridgeTarget);
  const OrientedBox b = panel_at(f, 0.7);
  const JointSpec& j = *f.joint;
  for (const Vec3& c : j.panel_home.corners()) {
    const Vec3 inward = c + 1e-6 * (j.panel_home.center() - c).normalized();
    CHECK(b.contains(rotate_about(inward, j.pivot, j.axis, j.signed_angle(0.7))));
  }
  CHECK_FALSE(b.contains(j.pivot + Vec3(0, 0, -1.0)));
}
