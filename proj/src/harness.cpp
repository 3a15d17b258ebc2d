#include "momapos/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"

namespace momapos {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::momapos: return "momapos";
    case Strategy::habitat: return "habitat";
    case Strategy::m3star: return "m3star";
    case Strategy::reuleaux: return "reuleaux";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : all_strategies()) {
    if (name == to_string(s)) return s;
  }
  throw ValidationError("unknown strategy '" + name + "'");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> all{Strategy::momapos, Strategy::habitat, Strategy::m3star, Strategy::reuleaux};
  return all;
}

unsigned env_threads() {
  if (const char* v = std::getenv("MOMAPOS_THREADS")) {
    const long n = std::strtol(v, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return 1;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

EvalRow run_one(const EvalTask& task, Strategy strategy, int trial, std::uint64_t trial_seed, const RobotModel& robot,
                const ReachabilityMap& irm, const PlannerConfig& base_config, const BaselineParams& bp) {
  EvalRow row;
  row.task = task.name;
  row.strategy = strategy;
  row.trial = trial;
  PlannerConfig config = base_config;
  apply_seed(config, trial_seed);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::optional<BasePose> pose;
    switch (strategy) {
      case Strategy::momapos: {
        PlanResult r = plan(*task.scene, robot, task.target, config, irm);
        row.timing = r.timing;
        if (r.feasible) pose = r.base_pose;
        else row.reason = "infeasible";
        break;
      }
      case Strategy::habitat: {
        auto r = habitat_placement(*task.scene, robot, task.target, bp);
        pose = r.pose;
        row.reason = r.reason;
        break;
      }
      case Strategy::m3star: {
        auto r = m3star_placement(*task.scene, robot, task.target, derive_seed(trial_seed, {7}), config, bp);
        pose = r.pose;
        row.reason = r.reason;
        break;
      }
      case Strategy::reuleaux: {
        auto r = reuleaux_placement(*task.scene, robot, task.target, irm, derive_seed(trial_seed, {8}), config, bp);
        pose = r.pose;
        row.reason = r.reason;
        break;
      }
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.pose = pose;
    if (pose) {
      const VerifyResult v = verify_placement(*task.scene, robot, make_target(*task.scene, task.target, config.waypoint_count),
                                              *pose, config);
      row.success = v.ok;
      if (v.ok) row.cost = v.nav.length;
      else row.reason = "verification failed: " + v.stage;
    }
  } catch (const std::exception& e) {
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.success = false;
    row.reason = std::string("error: ") + e.what();
  }
  return row;
}

}  // namespace

EvalReport evaluate(const std::vector<EvalTask>& tasks, const std::vector<Strategy>& strategies,
                    const RobotModel& robot, const ReachabilityMap& irm, const PlannerConfig& config,
                    const EvalOptions& options) {
  if (tasks.empty() || strategies.empty() || options.trials < 1) {
    throw std::invalid_argument("evaluate needs tasks, strategies and at least one trial");
  }
  struct Job {
    std::size_t task;
    Strategy strategy;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (Strategy s : strategies) {
      for (int k = 0; k < options.trials; ++k) jobs.push_back({t, s, k});
    }
  }
  EvalReport report;
  report.baseline = options.baseline;
  report.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      // Every strategy sees the same seed for a given (task, trial).
      const std::uint64_t seed = derive_seed(options.seed, {j.task, static_cast<std::uint64_t>(j.trial)});
      report.rows[i] = run_one(tasks[j.task], j.strategy, j.trial, seed, robot, irm, config, options.baseline);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return report;
}

std::vector<EvalAggregate> EvalReport::aggregates() const {
  std::vector<EvalAggregate> out;
  std::map<std::pair<std::string, int>, std::size_t> slot;
  std::vector<std::vector<double>> times, costs;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.task, static_cast<int>(r.strategy));
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      EvalAggregate a;
      a.task = r.task;
      a.strategy = r.strategy;
      out.push_back(a);
      times.emplace_back();
      costs.emplace_back();
    }
    EvalAggregate& a = out[it->second];
    ++a.trials;
    times[it->second].push_back(r.seconds);
    if (r.success) {
      ++a.successes;
      costs[it->second].push_back(r.cost);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].srate = 100.0 * out[i].successes / out[i].trials;
    mean_std(times[i], out[i].time_mean, out[i].time_std);
    mean_std(costs[i], out[i].cost_mean, out[i].cost_std);
  }
  return out;
}

std::map<std::string, double> EvalReport::timing_breakdown() const {
  std::map<std::string, double> pct;
  for (const auto& s : plan_stages()) pct[s] = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.strategy != Strategy::momapos || r.timing.empty()) continue;
    double total = 0.0;
    for (const auto& [k, v] : r.timing) total += v;
    if (!(total > 0.0)) continue;
    for (const auto& [k, v] : r.timing) pct[k] += 100.0 * v / total;
    ++n;
  }
  if (n > 0) {
    for (auto& [k, v] : pct) v /= n;
  }
  return pct;
}

std::string EvalReport::csv(bool with_times) const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "task,strategy,trial,success,cost_m,x,y,yaw,reason";
  if (with_times) {
    out << ",time_s";
    for (const auto& s : plan_stages()) out << ',' << s << "_s";
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r.task << ',' << to_string(r.strategy) << ',' << r.trial << ',' << (r.success ? 1 : 0) << ',' << r.cost;
    if (r.pose) out << ',' << r.pose->xy.x() << ',' << r.pose->xy.y() << ',' << r.pose->yaw;
    else out << ",,,";
    std::string reason = r.reason;
    for (char& c : reason) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << ',' << reason;
    if (with_times) {
      out << ',' << r.seconds;
      for (const auto& s : plan_stages()) {
        const auto it = r.timing.find(s);
        out << ',';
        if (it != r.timing.end()) out << it->second;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::table_one() const {
  std::ostringstream out;
  out << std::fixed;
  out << std::left << std::setw(22) << "Task" << std::setw(10) << "Method" << std::right << std::setw(18) << "Time (s)"
      << std::setw(18) << "Cost (m)" << std::setw(10) << "SRate" << '\n';
  for (const auto& a : aggregates()) {
    std::ostringstream t, c;
    t << std::fixed << std::setprecision(3) << a.time_mean << " +- " << a.time_std;
    c << std::fixed << std::setprecision(2) << a.cost_mean << " +- " << a.cost_std;
    out << std::left << std::setw(22) << a.task << std::setw(10) << to_string(a.strategy) << std::right << std::setw(18)
        << t.str() << std::setw(18) << c.str() << std::setw(9) << std::setprecision(1) << a.srate << "%\n";
  }
  return out.str();
}

std::string EvalReport::table_three() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(20) << "Stage" << std::right << std::setw(12) << "Percent" << '\n';
  double total = 0.0;
  for (const auto& [k, v] : timing_breakdown()) {
    out << std::left << std::setw(20) << k << std::right << std::setw(11) << v << "%\n";
    total += v;
  }
  out << std::left << std::setw(20) << "total" << std::right << std::setw(11) << total << "%\n";
  return out.str();
}

nlohmann::json EvalReport::summary(bool with_times) const {
  using nlohmann::json;
  json j;
  j["baseline"] = {{"habitat_standoff", baseline.habitat_standoff},
                   {"trial_budget", baseline.trial_budget},
                   {"cell", baseline.cell}};
  json rows_j = json::array();
  for (const auto& a : aggregates()) {
    json r{{"task", a.task},
           {"strategy", to_string(a.strategy)},
           {"trials", a.trials},
           {"successes", a.successes},
           {"srate", a.srate},
           {"cost_mean", a.cost_mean},
           {"cost_std", a.cost_std}};
    if (with_times) {
      r["time_mean"] = a.time_mean;
      r["time_std"] = a.time_std;
    }
    rows_j.push_back(r);
  }
  j["aggregates"] = rows_j;
  if (with_times) j["timing_percent"] = timing_breakdown();
  return j;
}

}  // namespace momapos
