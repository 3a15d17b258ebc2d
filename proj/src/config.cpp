#include <fstream>
#include <set>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"
#include "momapos/search.hpp"

namespace momapos {

using nlohmann::json;

void PlannerConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("config: ") + what);
  };
  need(M >= 1, "M must be at least 1");
  need(T >= 2, "T must be at least 2");
  need(k1 >= 0.0, "k1 must be nonnegative");
  need(alpha_min > 0.0 && alpha_min <= alpha_init && alpha_init <= 1.0, "need 0 < alpha_min <= alpha_init <= 1");
  need(alpha_decay > 0.0 && alpha_decay < 1.0, "alpha_decay must be in (0, 1)");
  need(weights.irm >= 0.0 && weights.field >= 0.0 && weights.irm + weights.field > 0.0,
       "weights must be nonnegative and not both zero");
  need(resolution > 0.0 && nav_resolution > 0.0, "resolutions must be positive");
  need(waypoint_count >= 2, "waypoints must be at least 2");
  need(sweep_samples >= 2, "sweep_samples must be at least 2");
  need(irm_samples >= 1 && irm_voxel > 0.0, "bad IRM parameters");
  need(importance.walk.k0 >= 0.0, "k0 must be nonnegative");
  need(importance.walk.walks_per_node >= 1 && importance.walk.walk_length >= 1, "bad walk parameters");
  need(importance.embed.dim >= 1 && importance.embed.window >= 1 && importance.embed.negatives >= 0 &&
           importance.embed.epochs >= 1 && importance.embed.learning_rate > 0.0,
       "bad embedding parameters");
  need(feasibility.ik.tol > 0.0 && feasibility.ik.restarts >= 1 && feasibility.ik.max_iters >= 1, "bad IK parameters");
  need(feasibility.rrt.step > 0.0 && feasibility.rrt.goal_bias >= 0.0 && feasibility.rrt.goal_bias <= 1.0 &&
           feasibility.rrt.max_iters >= 1 && feasibility.rrt.check_step > 0.0,
       "bad RRT parameters");
  need(feasibility.point_spacing > 0.0 && feasibility.tool_length >= 0.0 &&
           feasibility.distal_length >= feasibility.tool_length, "bad collision parameters");
}

void apply_seed(PlannerConfig& c, std::uint64_t seed) {
  c.seed = derive_seed(seed, {0});
  c.importance.walk.seed = derive_seed(seed, {1});
  c.importance.embed.seed = derive_seed(seed, {2});
  c.feasibility.seed = derive_seed(seed, {3});
  c.feasibility.ik.seed = derive_seed(seed, {4});
  c.feasibility.rrt.seed = derive_seed(seed, {5});
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError("config: '" + where + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ParseError("config: unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

PlannerConfig parse_config(const json& doc) {
  PlannerConfig c;
  check_keys(doc,
             {"M", "T", "k1", "k1_prime", "alpha_init", "alpha_decay", "alpha_min", "weights", "resolution",
              "nav_resolution", "waypoints", "sweep_samples", "sampling", "seed", "threads", "irm", "importance", "ik",
              "rrt", "collision"},
             "config");
  read(doc, "M", c.M);
  read(doc, "T", c.T);
  read(doc, "k1", c.k1);
  read(doc, "k1_prime", c.k1_prime);
  read(doc, "alpha_init", c.alpha_init);
  read(doc, "alpha_decay", c.alpha_decay);
  read(doc, "alpha_min", c.alpha_min);
  read(doc, "resolution", c.resolution);
  read(doc, "nav_resolution", c.nav_resolution);
  read(doc, "waypoints", c.waypoint_count);
  read(doc, "sweep_samples", c.sweep_samples);
  read(doc, "threads", c.threads);
  if (doc.contains("sampling")) {
    const std::string s = doc.at("sampling").is_string() ? doc.at("sampling").get<std::string>() : "";
    if (s == "lhs") c.sampling = SamplingMode::lhs;
    else if (s == "grid") c.sampling = SamplingMode::grid;
    else throw ParseError("config: sampling must be \"lhs\" or \"grid\"");
  }
  if (doc.contains("seed")) {
    std::uint64_t seed = 0;
    read(doc, "seed", seed);
    apply_seed(c, seed);
  }
  if (doc.contains("weights")) {
    const auto& w = doc.at("weights");
    check_keys(w, {"irm", "field"}, "weights");
    read(w, "irm", c.weights.irm);
    read(w, "field", c.weights.field);
  }
  if (doc.contains("irm")) {
    const auto& w = doc.at("irm");
    check_keys(w, {"samples", "voxel"}, "irm");
    read(w, "samples", c.irm_samples);
    read(w, "voxel", c.irm_voxel);
  }
  if (doc.contains("importance")) {
    const auto& w = doc.at("importance");
    check_keys(w, {"k0", "walks_per_node", "walk_length", "dim", "window", "negatives", "epochs", "learning_rate"},
               "importance");
    read(w, "k0", c.importance.walk.k0);
    read(w, "walks_per_node", c.importance.walk.walks_per_node);
    read(w, "walk_length", c.importance.walk.walk_length);
    read(w, "dim", c.importance.embed.dim);
    read(w, "window", c.importance.embed.window);
    read(w, "negatives", c.importance.embed.negatives);
    read(w, "epochs", c.importance.embed.epochs);
    read(w, "learning_rate", c.importance.embed.learning_rate);
  }
  if (doc.contains("ik")) {
    const auto& w = doc.at("ik");
    check_keys(w, {"tol", "restarts", "max_iters", "damping"}, "ik");
    read(w, "tol", c.feasibility.ik.tol);
    read(w, "restarts", c.feasibility.ik.restarts);
    read(w, "max_iters", c.feasibility.ik.max_iters);
    read(w, "damping", c.feasibility.ik.damping);
  }
  if (doc.contains("rrt")) {
    const auto& w = doc.at("rrt");
    check_keys(w, {"step", "goal_bias", "max_iters", "check_step"}, "rrt");
    read(w, "step", c.feasibility.rrt.step);
    read(w, "goal_bias", c.feasibility.rrt.goal_bias);
    read(w, "max_iters", c.feasibility.rrt.max_iters);
    read(w, "check_step", c.feasibility.rrt.check_step);
  }
  if (doc.contains("collision")) {
    const auto& w = doc.at("collision");
    check_keys(w, {"point_spacing", "tool_length", "distal_length"}, "collision");
    read(w, "point_spacing", c.feasibility.point_spacing);
    read(w, "tool_length", c.feasibility.tool_length);
    read(w, "distal_length", c.feasibility.distal_length);
  }
  c.validate();
  return c;
}

PlannerConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const PlannerConfig& c) {
  return json{
      {"M", c.M},
      {"T", c.T},
      {"k1", c.k1},
      {"k1_prime", c.k1_prime},
      {"alpha_init", c.alpha_init},
      {"alpha_decay", c.alpha_decay},
      {"alpha_min", c.alpha_min},
      {"weights", {{"irm", c.weights.irm}, {"field", c.weights.field}}},
      {"resolution", c.resolution},
      {"nav_resolution", c.nav_resolution},
      {"waypoints", c.waypoint_count},
      {"sweep_samples", c.sweep_samples},
      {"sampling", c.sampling == SamplingMode::grid ? "grid" : "lhs"},
      {"irm", {{"samples", c.irm_samples}, {"voxel", c.irm_voxel}}},
      {"importance",
       {{"k0", c.importance.walk.k0},
        {"walks_per_node", c.importance.walk.walks_per_node},
        {"walk_length", c.importance.walk.walk_length},
        {"dim", c.importance.embed.dim},
        {"window", c.importance.embed.window},
        {"negatives", c.importance.embed.negatives},
        {"epochs", c.importance.embed.epochs},
        {"learning_rate", c.importance.embed.learning_rate}}},
      {"ik",
       {{"tol", c.feasibility.ik.tol},
        {"restarts", c.feasibility.ik.restarts},
        {"max_iters", c.feasibility.ik.max_iters},
        {"damping", c.feasibility.ik.damping}}},
      {"rrt",
       {{"step", c.feasibility.rrt.step},
        {"goal_bias", c.feasibility.rrt.goal_bias},
        {"max_iters", c.feasibility.rrt.max_iters},
        {"check_step", c.feasibility.rrt.check_step}}},
      {"collision", {{"point_spacing", c.feasibility.point_spacing}, {"tool_length", c.feasibility.tool_length},
                        {"distal_length", c.feasibility.distal_length}}},
  };
}

}  // namespace momapos
