#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "momapos/baselines.hpp"
#include "momapos/search.hpp"

namespace momapos {

enum class Strategy { momapos, habitat, m3star, reuleaux };

const char* to_string(Strategy s);
/// Throws ValidationError for unknown names.
Strategy parse_strategy(const std::string& name);
const std::vector<Strategy>& all_strategies();

struct EvalTask {
  std::string name;
  std::shared_ptr<const Scene> scene;
  std::string target;
};

struct EvalRow {
  std::string task;
  Strategy strategy = Strategy::momapos;
  int trial = 0;
  bool success = false;
  double seconds = 0.0;
  /// Navigation path length of a verified placement; 0 on failure.
  double cost = 0.0;
  std::string reason;
  std::optional<BasePose> pose;
  /// Stage seconds (momapos only).
  std::map<std::string, double> timing;
};

struct EvalAggregate {
  std::string task;
  Strategy strategy = Strategy::momapos;
  int trials = 0;
  int successes = 0;
  double srate = 0.0;
  double time_mean = 0.0, time_std = 0.0;
  /// Over successful trials only.
  double cost_mean = 0.0, cost_std = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  BaselineParams baseline;

  std::vector<EvalAggregate> aggregates() const;
  /// Mean percentage of planning time per stage over momapos rows.
  std::map<std::string, double> timing_breakdown() const;
  /// One line per row; timing columns are left out when `with_times` is false.
  std::string csv(bool with_times = true) const;
  std::string table_one() const;
  std::string table_three() const;
  nlohmann::json summary(bool with_times = true) const;
};

struct EvalOptions {
  int trials = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  BaselineParams baseline;
};

/// Worker count from MOMAPOS_THREADS, else 1.
unsigned env_threads();

/// Runs every (task, strategy, trial) and verifies each placement with the
/// shared verifier. Errors are recorded as failed rows.
EvalReport evaluate(const std::vector<EvalTask>& tasks, const std::vector<Strategy>& strategies,
                    const RobotModel& robot, const ReachabilityMap& irm, const PlannerConfig& config,
                    const EvalOptions& options);

}  // namespace momapos
