#pragma once
// Shared fixtures for the unit and acceptance tests.
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include "momapos/fixtures.hpp"
#include "momapos/kinematics.hpp"
#include "momapos/reachability.hpp"
#include "momapos/scene.hpp"

namespace momapos::test {

inline unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Default-size map per preset, built once per process.
inline const ReachabilityMap& shared_irm(const std::string& robot_name) {
  static std::mutex mu;
  static std::map<std::string, ReachabilityMap> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(robot_name);
  if (it == cache.end()) {
    it = cache.emplace(robot_name, build_irm(robot_preset(robot_name), kDefaultIrmSamples, kDefaultVoxelSize, 1,
                                             worker_count()))
             .first;
  }
  return it->second;
}

inline RobotModel planar_chain(std::vector<double> lengths) {
  std::vector<DhRow> rows;
  for (double a : lengths) rows.push_back({a, 0.0, 0.0, 0.0, -3.141592653589793, 3.141592653589793});
  return RobotModel("chain", Vec3(0.4, 0.4, 0.2), 0.3, std::move(rows));
}

inline Scene single_object_scene(const Vec3& min, const Vec3& max, const Rect2& floor = {Vec2(0, 0), Vec2(5, 5)},
                                 const std::string& id = "box") {
  return Scene({make_box(id, min, max)}, {}, floor);
}

}  // namespace momapos::test
