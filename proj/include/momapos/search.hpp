#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "momapos/importance.hpp"
#include "momapos/motion.hpp"
#include "momapos/placement.hpp"
#include "momapos/reachability.hpp"

namespace momapos {

enum class SamplingMode { lhs, grid };

struct PlannerConfig {
  int M = 100;
  int T = 8;
  double k1 = 1.0;
  double k1_prime = -1.0;
  double alpha_init = 0.45;
  double alpha_decay = 0.9;
  double alpha_min = 0.05;
  ScoreWeights weights;
  double resolution = kAreaResolution;
  double nav_resolution = 0.05;
  int waypoint_count = kArticulatedWaypoints;
  int sweep_samples = kDefaultSweepSamples;
  /// grid = every lattice cell of the area instead of M LHS samples.
  SamplingMode sampling = SamplingMode::lhs;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t irm_samples = kDefaultIrmSamples;
  double irm_voxel = kDefaultVoxelSize;
  ImportanceParams importance;
  FeasibilityParams feasibility;

  /// Throws ValidationError.
  void validate() const;
};

PlannerConfig parse_config(const nlohmann::json& doc);
PlannerConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const PlannerConfig& config);

/// Applies a seed to every random stream of the config.
void apply_seed(PlannerConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Latin Hypercube over `bounds`: one sample per x stratum and per y stratum.
/// Samples failing `member` are redrawn inside their cell up to 20 times,
/// then dropped.
std::vector<Vec2> lhs_sample(const Rect2& bounds, int M, std::uint64_t seed,
                             const std::function<bool(const Vec2&)>& member);
/// Throws EmptyArea when nothing survives.
std::vector<Vec2> lhs_sample(const CandidateArea& area, int M, std::uint64_t seed);

inline constexpr int kLhsRedraws = 20;
inline constexpr std::size_t kExactTspLimit = 12;

/// w(i -> j) = k1 * dist(i, j) + k1' * (F_j - F_i); the start has F = 0.
double tsp_edge(const Vec2& a, double fa, const Vec2& b, double fb, double k1, double k1_prime);
/// Total weight of visiting `order` from `start`.
double tsp_path_cost(std::span<const Vec2> pts, std::span<const double> F, const Vec2& start,
                     std::span<const std::size_t> order, double k1, double k1_prime);
/// Open Hamiltonian path from `start` minimizing total weight. Exact
/// branch-and-bound up to kExactTspLimit points, nearest-neighbor beyond.
std::vector<std::size_t> open_tsp_order(std::span<const Vec2> pts, std::span<const double> F, const Vec2& start,
                                        double k1, double k1_prime);

/// Indices grouped T at a time in descending score order (index breaks ties).
std::vector<std::vector<std::size_t>> group_candidates(std::span<const double> scores, int T);

// ---------------------------------------------------------------------------

/// Seed of the feasibility check at a base position; depends only on the
/// position so a cell gets the same verdict whichever search visits it.
std::uint64_t candidate_seed(std::uint64_t seed, const Vec2& xy);

struct VerifyResult {
  bool ok = false;
  std::string stage;
  NavPath nav;
  FeasibilityResult manipulation;
};

/// The shared verifier: the pose must lie in the candidate area of the full
/// scene (footprint at its own yaw), be reachable from the scene start, and
/// pass manipulation feasibility against every object.
VerifyResult verify_placement(const Scene& scene, const RobotModel& robot, const TargetSpec& target,
                              const BasePose& pose, const PlannerConfig& config);

struct PlanResult {
  bool feasible = false;
  BasePose base_pose;
  NavPath nav;
  ArmTrajectory trajectory;
  std::vector<JointVector> waypoint_configs;
  std::size_t candidates_tried = 0;
  double alpha_final = 0.0;
  std::vector<double> alpha_history;
  std::vector<std::size_t> subset_sizes;
  ObjectSet subset;
  std::map<std::string, double> importance;
  /// Stage name -> seconds.
  std::map<std::string, double> timing;

  double total_seconds() const;
  nlohmann::json to_json(bool with_timing = true) const;
};

inline const std::vector<std::string>& plan_stages() {
  static const std::vector<std::string> names{"importance", "modeling", "potential_field", "sampling",
                                              "feasibility"};
  return names;
}

/// Full pipeline with alpha annealing. Propagates OutOfVerticalReach and
/// UnknownTarget; an exhausted search returns feasible = false.
PlanResult plan(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                const PlannerConfig& config, const ReachabilityMap& irm);

/// Every lattice cell of the full-scene area, checked by the shared
/// verifier; the first feasible one in row-major order, if any.
std::optional<BasePose> exhaustive_oracle(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                          const PlannerConfig& config);

void write_plan_json(const PlanResult& result, const std::filesystem::path& path, bool with_timing = true);

}  // namespace momapos
