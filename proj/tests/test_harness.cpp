#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "momapos/baselines.hpp"
#include "momapos/errors.hpp"
#include "momapos/harness.hpp"
#include "momapos/search.hpp"
#include "support.hpp"

using namespace momapos;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "momapos_harness_test";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
  std::string cmd = std::string(MOMAPOS_CLI_PATH) + " " + args;
  cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>" + stderr_file.string();
  cmd += " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("strategies: names round trip") {
  for (Strategy s : all_strategies()) CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("oracle"), ValidationError);
}

TEST_CASE("baselines: rigid targets on an open floor") {
  const RobotModel robot = robot_preset("generic6");
  const Scene s({make_box("cup", Vec3(2.45, 2.45, 0.7), Vec3(2.55, 2.55, 0.8))}, {}, Rect2{Vec2(0, 0), Vec2(5, 5)},
                Vec2(0.5, 0.5));
  PlannerConfig cfg;
  const BaselineResult h = habitat_placement(s, robot, "cup");
  const BaselineResult m = m3star_placement(s, robot, "cup", 1, cfg);
  REQUIRE(h.pose.has_value());
  REQUIRE(m.pose.has_value());
  CHECK(h.pose->xy == m.pose->xy);
  // The nearest free cell keeps the base footprint clear of the cup.
  const double half_diag = 0.5 * robot.base_dims().head<2>().norm();
  CHECK(dist_xy(h.pose->xy, Vec2(2.5, 2.5)) <= half_diag + 0.05 + 0.05 * std::sqrt(2.0));
}

TEST_CASE("baselines: habitat frontal pose inside a wall is rejected") {
  const RobotModel robot = robot_preset("generic6");
  Scene base = fridge_fixture(0);
  std::vector<ObjectInstance> objs = base.objects();
  const ObjectInstance& f = base.at(kFridgeTarget);
  const double y = f.bbox.min.y() - 0.6;
  objs.push_back(make_box("wall", Vec3(base.floor().min.x(), y - 0.1, 0), Vec3(base.floor().max.x(), y + 0.1, 2.0)));
  const Scene walled(objs, base.relations(), base.floor(), base.declared_start());
  const BaselineResult h = habitat_placement(walled, robot, kFridgeTarget);
  CHECK_FALSE(h.pose.has_value());
}

TEST_CASE("baselines: seeded runs repeat and reuleaux tries cells in score order") {
  const RobotModel robot = robot_preset("generic6");
  const ReachabilityMap& irm = test::shared_irm("generic6");
  const Scene s = fridge_fixture(1);
  PlannerConfig cfg;
  apply_seed(cfg, 5);
  const BaselineResult a = m3star_placement(s, robot, kFridgeTarget, 11, cfg);
  const BaselineResult b = m3star_placement(s, robot, kFridgeTarget, 11, cfg);
  CHECK(a.tried == b.tried);
  CHECK(a.pose.has_value() == b.pose.has_value());

  const BaselineResult r = reuleaux_placement(s, robot, kFridgeTarget, irm, 12, cfg);
  REQUIRE(r.tried_scores.size() == r.tried.size());
  CHECK(r.tried.size() > 0);
  for (std::size_t i = 1; i < r.tried_scores.size(); ++i) CHECK(r.tried_scores[i] <= r.tried_scores[i - 1]);
}

TEST_CASE("baselines: reuleaux with an empty map finds nothing") {
  const RobotModel robot = robot_preset("generic6");
  ReachabilityMap empty = test::shared_irm("generic6");
  std::fill(empty.counts.begin(), empty.counts.end(), 0u);
  const Scene s = open_table_fixture(0);
  PlannerConfig cfg;
  CHECK_FALSE(reuleaux_placement(s, robot, kTableTarget, empty, 1, cfg).pose.has_value());
}

TEST_CASE("baselines: m3star on the fridge succeeds for some seeds and fails for others") {
  const RobotModel robot = robot_preset("generic6");
  const Scene s = fridge_fixture(0);
  const TargetSpec t = make_target(s, kFridgeTarget);
  PlannerConfig cfg;
  apply_seed(cfg, 6);
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BaselineResult r = m3star_placement(s, robot, kFridgeTarget, seed, cfg);
    successes += r.pose.has_value() && verify_placement(s, robot, t, *r.pose, cfg).ok;
  }
  MESSAGE("m3star fridge successes over 50 seeds: " << successes);
  CHECK(successes > 0);
  CHECK(successes < 50);
}

TEST_CASE("eval: rows, aggregates and timing breakdown") {
  const RobotModel robot = robot_preset("generic6");
  std::vector<EvalTask> tasks;
  for (int v = 0; v < 2; ++v) {
    tasks.push_back({"table_" + std::to_string(v), std::make_shared<const Scene>(open_table_fixture(v)), kTableTarget});
  }
  PlannerConfig cfg;
  EvalOptions opt;
  opt.trials = 2;
  opt.seed = 3;
  const EvalReport rep = evaluate(tasks, all_strategies(), robot, test::shared_irm("generic6"), cfg, opt);
  CHECK(rep.rows.size() == 2u * 4u * 2u);
  const auto agg = rep.aggregates();
  CHECK(agg.size() == 2u * 4u);
  for (const auto& a : agg) CHECK(a.trials == 2);
  double sum = 0.0;
  for (const auto& [k, v] : rep.timing_breakdown()) sum += v;
  CHECK(sum == doctest::Approx(100.0).epsilon(0.001));
  CHECK(rep.csv(false).find("time_s") == std::string::npos);
  CHECK(rep.csv(true).find("time_s") != std::string::npos);

  const EvalReport again = evaluate(tasks, all_strategies(), robot, test::shared_irm("generic6"), cfg, opt);
  CHECK(again.csv(false) == rep.csv(false));
}

TEST_CASE("cli: usage errors exit with status 2 and print the synopsis") {
  const fs::path dir = scratch_dir();
  const fs::path err = dir / "stderr.txt";
  CHECK(run_cli("plan --target fridge", err) == 2);
  CHECK(slurp(err).find("usage: momapos") != std::string::npos);
  CHECK(run_cli("", err) == 2);
  CHECK(run_cli("plan --scene /nonexistent.json --target x", err) == 2);
  CHECK(run_cli("frobnicate", err) == 2);
}

TEST_CASE("cli: plan twice gives identical reports; render peaks on the handle side") {
  const fs::path dir = scratch_dir();
  const std::string data = MOMAPOS_DATA_DIR;
  const std::string irm = (dir / "g6.irm").string();
  REQUIRE(run_cli("irm build --robot generic6 --out " + irm) == 0);
  const std::string common =
      "--scene " + data + "/scenes/kitchen.json --robot " + data + "/robots/generic6.json --target fridge --seed 7 --irm " + irm;
  REQUIRE(run_cli("plan " + common + " --out " + (dir / "a.json").string()) == 0);
  REQUIRE(run_cli("plan " + common + " --out " + (dir / "b.json").string()) == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.json").find("timing") == std::string::npos);

  const Scene s = load_scene(data + "/scenes/fridge.json");
  REQUIRE(run_cli("render --scene " + data + "/scenes/fridge.json --target fridge --irm " + irm + " --out " +
                  (dir / "fridge_map").string()) == 0);
  std::ifstream pgm(dir / "fridge_map.pgm", std::ios::binary);
  std::string magic, line;
  pgm >> magic;
  REQUIRE(magic == "P5");
  std::getline(pgm, line);
  int w = 0, h = 0, maxval = 0;
  while (pgm.peek() == '#') std::getline(pgm, line);
  pgm >> w >> h >> maxval;
  pgm.get();
  std::vector<unsigned char> px(static_cast<std::size_t>(w) * h);
  pgm.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  const auto best = std::max_element(px.begin(), px.end()) - px.begin();
  const int col = static_cast<int>(best % w);
  const ObjectInstance& f = s.at(kFridgeTarget);
  const double x = f.position.x() + (col - (w - 1) / 2) * 0.05;
  CHECK((x - f.joint->pivot.x()) * (f.joint->handle_home.x() - f.joint->pivot.x()) > 0.0);
}
