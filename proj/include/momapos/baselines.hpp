#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "momapos/reachability.hpp"
#include "momapos/search.hpp"

namespace momapos {

struct BaselineParams {
  /// Distance from an appliance's front face to the base center.
  double habitat_standoff = 0.6;
  /// Manipulation checks (reuleaux) or cell draws (m3star) before giving up.
  int trial_budget = 50;
  double cell = 0.05;
};

struct BaselineResult {
  std::optional<BasePose> pose;
  /// Cells in the order they were tried, with the score used to rank them
  /// (reuleaux) or 0.
  std::vector<Vec2> tried;
  std::vector<double> tried_scores;
  std::string reason;
};

/// Rigid: nearest navigable free cell to the target. Articulated: a fixed
/// frontal standoff, checked against static boxes only.
BaselineResult habitat_placement(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                 const BaselineParams& params = {});

/// Rigid: nearest navigable cell within reach. Articulated: seeded uniform
/// draws over the reach disc until one is navigable, statically free and
/// passes manipulation feasibility.
BaselineResult m3star_placement(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                std::uint64_t seed, const PlannerConfig& config, const BaselineParams& params = {});

/// Reach-disc cells ranked by reachability score toward the target point,
/// ties broken at random, tried in rank order. Cells that are not navigable
/// and statically free are skipped without using the budget.
BaselineResult reuleaux_placement(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                  const ReachabilityMap& irm, std::uint64_t seed, const PlannerConfig& config,
                                  const BaselineParams& params = {});

}  // namespace momapos
