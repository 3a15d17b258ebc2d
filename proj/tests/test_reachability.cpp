#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"
#include "support.hpp"

using namespace momapos;
using std::numbers::pi;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("momapos_test_" + name);
}

// Distance from a voxel box to the circle of radius r in the z = 0 plane.
bool voxel_touches_circle(const Aabb& box, double r) {
  constexpr double eps = 1e-9;
  if (box.min.z() > eps || box.max.z() < -eps) return false;
  const double nx = std::clamp(0.0, box.min.x(), box.max.x()), ny = std::clamp(0.0, box.min.y(), box.max.y());
  const double near = std::hypot(nx, ny);
  const double far = std::hypot(std::max(std::abs(box.min.x()), std::abs(box.max.x())),
                                std::max(std::abs(box.min.y()), std::abs(box.max.y())));
  return near <= r + eps && r <= far + eps;
}

}  // namespace

TEST_CASE("irm: single sweeping link only marks voxels on its circle") {
  const RobotModel r = test::planar_chain({0.6, 0.0});
  const ReachabilityMap m = build_irm(r, 20000, 0.05, 1);
  REQUIRE(m.nonzero_voxels() > 0);
  for (std::uint32_t i = 0; i < m.dims[0]; ++i) {
    for (std::uint32_t j = 0; j < m.dims[1]; ++j) {
      for (std::uint32_t k = 0; k < m.dims[2]; ++k) {
        if (m.counts[m.index(i, j, k)] == 0) continue;
        CHECK(voxel_touches_circle(m.voxel_box(i, j, k), 0.6));
      }
    }
  }
}

TEST_CASE("irm: one sample marks one voxel") {
  const ReachabilityMap m = build_irm(robot_preset("generic6"), 1, 0.05, 2);
  CHECK(m.nonzero_voxels() == 1);
  CHECK(m.max_count == 1);
  CHECK_THROWS_AS(build_irm(robot_preset("generic6"), 0, 0.05, 2), std::invalid_argument);
}

TEST_CASE("irm: thread count does not change the map") {
  const RobotModel r = robot_preset("short6");
  CHECK(build_irm(r, 50000, 0.05, 3, 1) == build_irm(r, 50000, 0.05, 3, 4));
}

TEST_CASE("irm: query normalization and extent") {
  const ReachabilityMap& m = test::shared_irm("planar2");
  const RobotModel r = robot_preset("planar2");
  CHECK(irm_query(m, BasePose{}, r.mount_height(), Vec3(5, 0, r.mount_height())) == 0.0);
  // Locate a voxel at the maximum count and query its center.
  for (std::uint32_t i = 0; i < m.dims[0]; ++i) {
    for (std::uint32_t j = 0; j < m.dims[1]; ++j) {
      for (std::uint32_t k = 0; k < m.dims[2]; ++k) {
        if (m.counts[m.index(i, j, k)] != m.max_count) continue;
        CHECK(m.score_local(m.voxel_center(i, j, k)) == 1.0);
        return;
      }
    }
  }
  FAIL("no voxel at max_count");
}

TEST_CASE("irm: score agrees with IK on the planar preset") {
  const ReachabilityMap& m = test::shared_irm("planar2");
  const RobotModel r = robot_preset("planar2");
  Rng rng(7);
  IkParams p;
  p.seed = 8;
  int agree = 0;
  constexpr int kPairs = 500;
  for (int n = 0; n < kPairs; ++n) {
    const BasePose base{Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.uniform(-pi, pi)};
    const double d = rng.uniform(0.0, 1.3), a = rng.uniform(-pi, pi);
    const Vec3 target(base.xy.x() + d * std::cos(a), base.xy.y() + d * std::sin(a), r.mount_height());
    const bool scored = irm_query(m, base, r.mount_height(), target) > 0.0;
    const Vec3 local = arm_base_frame(r, base).inverse() * target;
    const bool solved = solve_ik(r, local, p).has_value();
    agree += scored == solved;
  }
  CHECK(agree >= 0.95 * kPairs);
}

TEST_CASE("irm: save and load") {
  const ReachabilityMap m = build_irm(robot_preset("planar2"), 30000, 0.08, 9);
  const auto path = temp_file("irm.bin");
  save_irm(m, path);
  const ReachabilityMap back = load_irm(path);
  CHECK(back == m);
  CHECK(back.voxel_size == 0.08);

  // Truncate and reload.
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size / 2);
  CHECK_THROWS_AS(load_irm(path), FormatError);
  {
    std::ofstream junk(path, std::ios::binary);
    junk << "not a map";
  }
  CHECK_THROWS_AS(load_irm(path), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_irm(path), IoError);
}
