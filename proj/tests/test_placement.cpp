#include <doctest.h>

#include <cmath>
#include <numbers>

#include "momapos/errors.hpp"
#include "momapos/placement.hpp"
#include "momapos/random.hpp"
#include "support.hpp"

using namespace momapos;
using std::numbers::pi;

namespace {

// Segment-vs-box by dense point sampling at 1 mm.
bool sampled_hit(const Vec3& p, const Vec3& q, const Aabb& box) {
  const int steps = std::max(1, static_cast<int>(std::ceil((q - p).norm() / 0.001)));
  for (int i = 0; i <= steps; ++i) {
    if (box.contains(p + (q - p) * (static_cast<double>(i) / steps))) return true;
  }
  return false;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a), d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c), d4 = cross2(d - c, b - c);
  return d1 * d2 <= 0 && d3 * d4 <= 0;
}

bool inside_convex(const std::array<Vec2, 4>& poly, const Vec2& p) {
  int pos = 0, neg = 0;
  for (int i = 0; i < 4; ++i) {
    const double c = cross2(poly[(i + 1) % 4] - poly[i], p - poly[i]);
    pos += c >= 0;
    neg += c <= 0;
  }
  return pos == 4 || neg == 4;
}

// Polygon overlap by edge crossings and vertex containment.
bool rect_overlap_oracle(const OrientedRect& r, const Rect2& box) {
  const auto a = r.corners();
  const std::array<Vec2, 4> b{box.min, Vec2(box.max.x(), box.min.y()), box.max, Vec2(box.min.x(), box.max.y())};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (segments_cross(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4])) return true;
    }
  }
  return inside_convex(a, b[0]) || inside_convex(b, a[0]);
}

}  // namespace

TEST_CASE("area: no obstacles gives the closed reach disc") {
  const RobotModel r = test::planar_chain({0.5, 0.5});
  const Scene s = test::single_object_scene(Vec3(2.4, 2.4, 0), Vec3(2.6, 2.6, 0.2));
  const Vec3 target(2.5, 2.5, r.mount_height());
  const CandidateArea area = candidate_area(s, {}, r, target);
  CHECK(area.radius() == doctest::Approx(1.0).epsilon(1e-12));
  for (const Vec2& p : area.lattice(0.05)) CHECK(area.contains(p) == ((p - target.head<2>()).norm() <= 1.0));
  CHECK_THROWS_AS(candidate_area(s, {}, r, Vec3(2.5, 2.5, r.mount_height() + 1.01)), OutOfVerticalReach);
}

TEST_CASE("area: a wall west of the target matches a brute-force membership oracle") {
  const RobotModel robot = robot_preset("generic6");
  const Scene s({make_box("wall", Vec3(1.6, 1.0, 0), Vec3(1.8, 4.0, 1.0)),
                 make_box("target", Vec3(2.45, 2.45, 0.8), Vec3(2.55, 2.55, 0.9))},
                {}, Rect2{Vec2(0, 0), Vec2(5, 5)});
  const Vec3 target = s.at("target").position;
  const CandidateArea area = candidate_area(s, {"wall"}, robot, target);
  const double dr = std::sqrt(robot.reach() * robot.reach() -
                              std::pow(target.z() - robot.mount_height(), 2));
  const Rect2 wall{Vec2(1.6, 1.0), Vec2(1.8, 4.0)};
  int members = 0, mismatches = 0;
  const int n = static_cast<int>(std::floor(dr / 0.05 + 1e-9));
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      const Vec2 p = target.head<2>() + 0.05 * Vec2(i, j);
      const double yaw = std::atan2(target.y() - p.y(), target.x() - p.x());
      const OrientedRect fp{p, 0.5 * robot.base_dims().head<2>(), yaw};
      const bool expect = (p - target.head<2>()).norm() <= dr && !rect_overlap_oracle(fp, wall);
      members += expect;
      mismatches += expect != area.contains(p);
    }
  }
  CHECK(members > 100);
  CHECK(mismatches == 0);
}

TEST_CASE("los: segment cases") {
  const Aabb unit{Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)};
  const std::vector<Aabb> occ{unit};
  CHECK(line_of_sight_clear(occ, Vec3(2, 2, 2), Vec3(2, 2, 2)));
  CHECK_FALSE(line_of_sight_clear(occ, Vec3(-1, 0, 0), Vec3(1, 0, 0)));
  CHECK(line_of_sight_clear(occ, Vec3(-1, 0.6, 0), Vec3(1, 0.6, 0)));

  Rng rng(12);
  std::vector<Aabb> boxes;
  for (int b = 0; b < 10; ++b) {
    const Vec3 lo(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 1));
    boxes.push_back(Aabb{lo, lo + Vec3(rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5))});
  }
  int agree = 0;
  for (int n = 0; n < 1000; ++n) {
    const Vec3 p(rng.uniform(0, 2.5), rng.uniform(0, 2.5), rng.uniform(0, 1.5));
    const Vec3 q(rng.uniform(0, 2.5), rng.uniform(0, 2.5), rng.uniform(0, 1.5));
    bool oracle = false;
    for (const auto& b : boxes) oracle = oracle || sampled_hit(p, q, b);
    agree += oracle == !line_of_sight_clear(boxes, p, q);
  }
  CHECK(agree == 1000);
}

TEST_CASE("field: direct values") {
  const std::vector<Aabb> wall{Aabb{Vec3(0.9, -1, 0), Vec3(1.1, 1, 2)}};
  CHECK(field_value(wall, Vec2(0, 0), 1.0, Vec3(2, 0, 1)) == 0.0);
  CHECK(field_value({}, Vec2(0, 0), 1.0, Vec3(2, 0, 1)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(field_value({}, Vec2(0, 0), 1.0, Vec3(0.01, 0, 1)) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("potential map: scores, membership and spot checks") {
  const RobotModel robot = robot_preset("generic6");
  const ReachabilityMap& irm = test::shared_irm("generic6");
  const Scene s = kitchen_fixture();
  const TargetSpec t = make_target(s, "fridge");
  const ObjectSet all = s.all_ids();
  const CandidateArea area = candidate_area(s, all, robot, t.position);
  const auto occ = collect_obstacles(s, all, "fridge");
  const ScoreWeights w;
  const PotentialMap map = potential_map(area, irm, robot, t.waypoints, 0.05, w, occ);
  CHECK(map.cells.size() == static_cast<std::size_t>(map.side() * map.side()));
  for (const auto& c : map.cells) {
    if (!c.member) CHECK(c.combined == 0.0);
  }
  Rng rng(13);
  const auto members = area.member_cells(0.05);
  REQUIRE(!members.empty());
  for (int n = 0; n < 20; ++n) {
    const Vec2 p = members[rng.index(members.size())];
    const int i = static_cast<int>(std::lround((p.x() - map.center.x()) / 0.05)) + map.half_cells;
    const int j = static_cast<int>(std::lround((p.y() - map.center.y()) / 0.05)) + map.half_cells;
    const double direct = combined_score(area, irm, robot, p, t.waypoints, w, map.field_max, occ);
    CHECK(map.at(i, j).combined == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(combined_score(area, irm, robot, area.center() + Vec2(50, 0), t.waypoints, w, 1.0, occ),
                  NotInArea);
}

TEST_CASE("potential map: field-only scores fall off with distance") {
  const RobotModel robot = robot_preset("generic6");
  const ReachabilityMap& irm = test::shared_irm("generic6");
  const Scene s = test::single_object_scene(Vec3(2.45, 2.45, 0.8), Vec3(2.55, 2.55, 0.9));
  const Vec3 target = s.at("box").position;
  const CandidateArea area = candidate_area(s, {}, robot, target);
  const std::vector<Vec3> wp{target};
  const PotentialMap map = potential_map(area, irm, robot, wp, 0.05, ScoreWeights{0.0, 1.0}, {});
  std::vector<std::pair<double, double>> by_distance;
  for (const auto& c : map.cells) {
    if (c.member) by_distance.emplace_back(std::max(dist_xy(c.xy, target.head<2>()), kMinFieldDistance), c.combined);
  }
  std::sort(by_distance.begin(), by_distance.end());
  int violations = 0;
  for (std::size_t k = 1; k < by_distance.size(); ++k) {
    const auto& [d0, s0] = by_distance[k - 1];
    const auto& [d1, s1] = by_distance[k];
    violations += d0 < d1 - 1e-9 && !(s0 > s1);
  }
  CHECK(by_distance.size() > 100);
  CHECK(violations == 0);

  // Every line blocked and the target outside the map: both terms vanish.
  const std::vector<Aabb> cage{Aabb{target - Vec3::Constant(0.2), target + Vec3::Constant(0.2)}};
  const Vec2 cell = area.member_cells(0.05).front();
  CHECK(field_sum(cage, cell, wp) == 0.0);
  ReachabilityMap empty_irm = irm;
  std::fill(empty_irm.counts.begin(), empty_irm.counts.end(), 0u);
  CHECK(combined_score(area, empty_irm, robot, cell, wp, ScoreWeights{}, 1.0, cage) == 0.0);
}

TEST_CASE("potential map: fridge maximum sits on the handle side, outside the sweep") {
  const RobotModel robot = robot_preset("generic6");
  const ReachabilityMap& irm = test::shared_irm("generic6");
  for (int v = 0; v < 6; ++v) {
    const Scene s = fridge_fixture(v);
    const ObjectInstance& fridge = s.at(kFridgeTarget);
    const TargetSpec t = make_target(s, kFridgeTarget);
    const ObjectSet all = s.all_ids();
    const CandidateArea area = candidate_area(s, all, robot, t.position);
    const PotentialMap map =
        potential_map(area, irm, robot, t.waypoints, 0.05, ScoreWeights{}, collect_obstacles(s, all, kFridgeTarget));
    const PotentialCell* best = map.best();
    REQUIRE(best != nullptr);
    const double handle_x = fridge.joint->handle_home.x(), pivot_x = fridge.joint->pivot.x();
    // The handle side is the side of the handle relative to the hinge.
    CHECK((best->xy.x() - pivot_x) * (handle_x - pivot_x) > 0.0);
    for (const Aabb& b : swept_obstacles(fridge, 10)) CHECK_FALSE(footprint(b).contains(best->xy));
  }
}
