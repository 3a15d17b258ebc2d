// Command-line front end: irm build|info, plan, importance, render, eval, fixture.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "momapos/baselines.hpp"
#include "momapos/errors.hpp"
#include "momapos/fixtures.hpp"
#include "momapos/harness.hpp"
#include "momapos/random.hpp"
#include "momapos/search.hpp"

namespace fs = std::filesystem;
using namespace momapos;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kUsage = 2;

const char* kSynopsis =
    "usage: momapos <command> [options]\n"
    "  irm build   --robot R --out FILE [--samples N] [--voxel V] [--seed S] [--csv FILE]\n"
    "  irm info    --irm FILE\n"
    "  plan        --scene FILE --target ID [--robot R] [--config FILE] [--irm FILE] [--seed S] [--out FILE]\n"
    "  importance  --scene FILE --target ID [--config FILE] [--alpha A] [--seed S] [--out FILE]\n"
    "  render      --scene FILE --target ID [--robot R] [--config FILE] [--irm FILE] [--seed S] --out PREFIX\n"
    "  eval        (--suite NAME | --scene FILE --target ID) [--strategies a,b] [--trials N] [--robot R]\n"
    "              [--config FILE] [--irm FILE] [--seed S] --out PREFIX\n"
    "  fixture     --name kitchen|fridge|table|desk|config|<robot preset> [--variant K] --out FILE\n"
    "exit status: 0 success, 1 infeasible, 2 usage or I/O error\n";

struct Common {
  std::string scene;
  std::string robot = "generic6";
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string target;
  std::string irm;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RobotModel load_robot_arg(const std::string& arg) {
  if (fs::exists(arg)) return load_robot(arg);
  for (const auto& name : robot_preset_names()) {
    if (name == arg) return robot_preset(arg);
  }
  throw UsageError("unknown robot '" + arg + "' (not a file or preset)");
}

PlannerConfig config_arg(const Common& c) {
  PlannerConfig cfg = c.config.empty() ? PlannerConfig{} : load_config(c.config);
  apply_seed(cfg, c.seed);
  cfg.threads = env_threads();
  return cfg;
}

ReachabilityMap irm_arg(const Common& c, const RobotModel& robot, const PlannerConfig& cfg) {
  if (!c.irm.empty()) {
    ReachabilityMap m = load_irm(c.irm);
    if (m.robot_name != robot.name()) {
      throw UsageError("IRM was built for '" + m.robot_name + "', not '" + robot.name() + "'");
    }
    return m;
  }
  return build_irm(robot, cfg.irm_samples, cfg.irm_voxel, derive_seed(c.seed, {9}), env_threads());
}

void need(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing ") + flag);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}


int cmd_irm_build(const Common& c, std::size_t samples, double voxel, const std::string& csv) {
  need(c.out, "--out");
  const RobotModel robot = load_robot_arg(c.robot);
  const ReachabilityMap m = build_irm(robot, samples, voxel, c.seed, env_threads());
  save_irm(m, c.out);
  if (!csv.empty()) export_irm_csv(m, csv);
  std::cerr << "irm: " << m.nonzero_voxels() << " nonzero voxels of " << m.counts.size() << "\n";
  return kOk;
}

int cmd_irm_info(const Common& c) {
  need(c.irm, "--irm");
  const ReachabilityMap m = load_irm(c.irm);
  nlohmann::json j{{"robot", m.robot_name},
                   {"voxel_size", m.voxel_size},
                   {"dims", m.dims},
                   {"extent_min", {m.extent.min.x(), m.extent.min.y(), m.extent.min.z()}},
                   {"extent_max", {m.extent.max.x(), m.extent.max.y(), m.extent.max.z()}},
                   {"build_seed", m.build_seed},
                   {"max_count", m.max_count},
                   {"nonzero_voxels", m.nonzero_voxels()}};
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) std::cout << text;
  else write_text(c.out, text);
  return kOk;
}

int cmd_plan(const Common& c) {
  need(c.scene, "--scene");
  need(c.target, "--target");
  const Scene scene = load_scene(c.scene);
  const RobotModel robot = load_robot_arg(c.robot);
  const PlannerConfig cfg = config_arg(c);
  const ReachabilityMap irm = irm_arg(c, robot, cfg);
  const PlanResult r = plan(scene, robot, c.target, cfg, irm);
  nlohmann::json j = r.to_json(false);
  j["target"] = c.target;
  j["robot"] = robot.name();
  j["seed"] = c.seed;
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text(c.out, text);
    nlohmann::json t{{"timing_ms", nlohmann::json::object()}, {"timing_percent", nlohmann::json::object()}};
    const double total = r.total_seconds();
    for (const auto& [k, v] : r.timing) {
      t["timing_ms"][k] = 1000.0 * v;
      t["timing_percent"][k] = total > 0.0 ? 100.0 * v / total : 0.0;
    }
    write_text(c.out + ".timing.json", t.dump(2) + "\n");
  }
  std::cerr << (r.feasible ? "feasible" : "infeasible") << ", " << r.candidates_tried << " candidates, "
            << 1000.0 * r.total_seconds() << " ms\n";
  return r.feasible ? kOk : kInfeasible;
}

int cmd_importance(const Common& c, std::optional<double> alpha) {
  need(c.scene, "--scene");
  need(c.target, "--target");
  const Scene scene = load_scene(c.scene);
  const PlannerConfig cfg = config_arg(c);
  const auto scores = predict_importance(scene, c.target, cfg.importance);
  const double a = alpha.value_or(cfg.alpha_init);
  if (!(a >= 0.0 && a <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
  const std::string text = importance_csv(select_objects(scores, c.target, a));
  if (c.out.empty()) std::cout << text;
  else write_text(c.out, text);
  return kOk;
}

int cmd_render(const Common& c) {
  need(c.scene, "--scene");
  need(c.target, "--target");
  need(c.out, "--out");
  const Scene scene = load_scene(c.scene);
  const RobotModel robot = load_robot_arg(c.robot);
  const PlannerConfig cfg = config_arg(c);
  const ReachabilityMap irm = irm_arg(c, robot, cfg);
  const TargetSpec target = make_target(scene, c.target, cfg.waypoint_count);
  const ObjectSet all = scene.all_ids();
  const CandidateArea area = candidate_area(scene, all, robot, target.position, cfg.sweep_samples);
  const auto occ = collect_obstacles(scene, all, c.target, cfg.sweep_samples);
  const PotentialMap map = potential_map(area, irm, robot, target.waypoints, cfg.resolution, cfg.weights, occ);
  map.write_pgm(c.out + ".pgm");
  map.write_csv(c.out + ".csv");
  if (const PotentialCell* best = map.best()) {
    std::cerr << "best cell " << best->xy.x() << ' ' << best->xy.y() << " score " << best->combined << "\n";
  }
  return kOk;
}

std::vector<EvalTask> suite_tasks(const std::string& name) {
  std::vector<EvalTask> tasks;
  auto add = [&](std::string id, Scene s, std::string target) {
    tasks.push_back({std::move(id), std::make_shared<const Scene>(std::move(s)), std::move(target)});
  };
  if (name == "fridge") {
    for (int v = 0; v < kSuiteSize; ++v) add("fridge_" + std::to_string(v), fridge_fixture(v), kFridgeTarget);
  } else if (name == "table") {
    for (int v = 0; v < kSuiteSize; ++v) add("table_" + std::to_string(v), open_table_fixture(v), kTableTarget);
  } else if (name == "kitchen") {
    add("kitchen_fridge", kitchen_fixture(), "fridge");
    add("kitchen_apple", kitchen_fixture(), "apple");
  } else if (name == "desk") {
    for (int v = 0; v < 20; ++v) add("desk_" + std::to_string(v), desk_scene(static_cast<std::uint64_t>(v)), kDeskTarget);
  } else {
    throw UsageError("unknown suite '" + name + "'");
  }
  return tasks;
}

int cmd_eval(const Common& c, const std::string& suite, const std::string& strategies, int trials) {
  need(c.out, "--out");
  std::vector<EvalTask> tasks;
  if (!suite.empty()) {
    tasks = suite_tasks(suite);
  } else {
    need(c.scene, "--scene or --suite");
    need(c.target, "--target");
    tasks.push_back({fs::path(c.scene).stem().string(), std::make_shared<const Scene>(load_scene(c.scene)), c.target});
  }
  std::vector<Strategy> strats;
  std::stringstream ss(strategies);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) strats.push_back(parse_strategy(item));
  }
  if (strats.empty()) throw UsageError("no strategies given");
  if (trials < 1) throw UsageError("--trials must be at least 1");
  const RobotModel robot = load_robot_arg(c.robot);
  PlannerConfig cfg = config_arg(c);
  const ReachabilityMap irm = irm_arg(c, robot, cfg);
  // Rows run in parallel; each plan stays single-threaded.
  cfg.threads = 1;
  EvalOptions opt;
  opt.trials = trials;
  opt.seed = c.seed;
  opt.threads = env_threads();
  const EvalReport report = evaluate(tasks, strats, robot, irm, cfg, opt);
  write_text(c.out + ".csv", report.csv(false));
  write_text(c.out + "_summary.json", report.summary(false).dump(2) + "\n");
  write_text(c.out + "_timing.csv", report.csv(true));
  std::cout << report.table_one() << "\n" << report.table_three();
  return kOk;
}

int cmd_fixture(const Common& c, const std::string& name, int variant) {
  need(c.out, "--out");
  if (name == "config") {
    write_text(c.out, config_to_json(PlannerConfig{}).dump(2) + "\n");
    return kOk;
  }
  for (const auto& preset : robot_preset_names()) {
    if (name == preset) {
      write_text(c.out, robot_to_json(robot_preset(preset)).dump(2) + "\n");
      return kOk;
    }
  }
  std::optional<Scene> s;
  if (name == "kitchen") s.emplace(kitchen_fixture());
  else if (name == "fridge") s.emplace(fridge_fixture(variant));
  else if (name == "table") s.emplace(open_table_fixture(variant));
  else if (name == "desk") s.emplace(desk_scene(static_cast<std::uint64_t>(variant)));
  else throw UsageError("unknown fixture '" + name + "'");
  save_scene(*s, c.out);
  return kOk;
}

void add_common(CLI::App* app, Common& c, bool scene, bool robot, bool irm) {
  if (scene) {
    app->add_option("--scene", c.scene, "Scene JSON file");
    app->add_option("--target", c.target, "Target object id");
  }
  if (robot) app->add_option("--robot", c.robot, "Robot preset name or JSON file");
  if (irm) app->add_option("--irm", c.irm, "Prebuilt reachability map");
  app->add_option("--config", c.config, "Planner config JSON");
  app->add_option("--seed", c.seed, "Seed for every random stream");
  app->add_option("--out", c.out, "Output file or prefix");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Base placement for mobile manipulation"};
  app.require_subcommand(1);
  Common c;

  auto* irm = app.add_subcommand("irm", "Build or inspect a reachability map");
  irm->require_subcommand(1);
  auto* irm_build = irm->add_subcommand("build", "Build a reachability map");
  std::size_t samples = kDefaultIrmSamples;
  double voxel = kDefaultVoxelSize;
  std::string csv;
  add_common(irm_build, c, false, true, false);
  irm_build->add_option("--samples", samples, "Joint samples");
  irm_build->add_option("--voxel", voxel, "Voxel edge in meters");
  irm_build->add_option("--csv", csv, "Also export voxels as CSV");
  auto* irm_info = irm->add_subcommand("info", "Describe a reachability map");
  add_common(irm_info, c, false, false, true);

  auto* plan_cmd = app.add_subcommand("plan", "Find a base placement");
  add_common(plan_cmd, c, true, true, true);

  auto* imp = app.add_subcommand("importance", "Score objects by importance to the target");
  add_common(imp, c, true, false, false);
  std::optional<double> alpha;
  imp->add_option("--alpha", alpha, "Selection threshold (default from config)");

  auto* render = app.add_subcommand("render", "Write the potential map as PGM and CSV");
  add_common(render, c, true, true, true);

  auto* eval = app.add_subcommand("eval", "Evaluate strategies on a suite or scene");
  add_common(eval, c, true, true, true);
  std::string suite, strategies = "momapos,habitat,m3star,reuleaux";
  int trials = 1;
  eval->add_option("--suite", suite, "fridge, table, kitchen or desk");
  eval->add_option("--strategies", strategies, "Comma-separated strategies");
  eval->add_option("--trials", trials, "Trials per task and strategy");

  auto* fixture = app.add_subcommand("fixture", "Write a built-in scene to JSON");
  add_common(fixture, c, false, false, false);
  std::string fixture_name;
  int variant = 0;
  fixture->add_option("--name", fixture_name, "Scene fixture, robot preset or config")->required();
  fixture->add_option("--variant", variant, "Variant index or seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << kSynopsis;
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << kSynopsis;
    return kUsage;
  }

  try {
    if (irm_build->parsed()) return cmd_irm_build(c, samples, voxel, csv);
    if (irm_info->parsed()) return cmd_irm_info(c);
    if (plan_cmd->parsed()) return cmd_plan(c);
    if (imp->parsed()) return cmd_importance(c, alpha);
    if (render->parsed()) return cmd_render(c);
    if (eval->parsed()) return cmd_eval(c, suite, strategies, trials);
    if (fixture->parsed()) return cmd_fixture(c, fixture_name, variant);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kSynopsis;
    return kUsage;
  } catch (const OutOfVerticalReach& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const EmptyArea& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  std::cerr << kSynopsis;
  return kUsage;
}
