#include "momapos/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>

#include "momapos/errors.hpp"
#include "momapos/occupancy.hpp"
#include "momapos/random.hpp"

namespace momapos {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool footprint_on_floor(const Scene& scene, const RobotModel& robot, const BasePose& pose) {
  const Rect2 b = robot.footprint_at(pose).bounds();
  return scene.floor().contains(b.min, 1e-9) && scene.floor().contains(b.max, 1e-9);
}

}  // namespace

// ---------------------------------------------------------------------------
// Sampling

std::vector<Vec2> lhs_sample(const Rect2& bounds, int M, std::uint64_t seed,
                             const std::function<bool(const Vec2&)>& member) {
  if (M < 1) throw std::invalid_argument("sample count must be at least 1");
  const auto n = static_cast<std::size_t>(M);
  std::vector<std::size_t> col(n);
  std::iota(col.begin(), col.end(), 0);
  Rng perm(derive_seed(seed, {0}));
  for (std::size_t i = n; i > 1; --i) std::swap(col[i - 1], col[perm.index(i)]);

  const Vec2 cell = (bounds.max - bounds.min) / static_cast<double>(M);
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < n; ++k) {
    // Row k, column col[k]; each sample has its own stream so a dropped
    // sample does not shift the others.
    Rng rng(derive_seed(seed, {1, k}));
    const Vec2 lo = bounds.min + Vec2(cell.x() * static_cast<double>(col[k]), cell.y() * static_cast<double>(k));
    for (int attempt = 0; attempt <= kLhsRedraws; ++attempt) {
      const Vec2 p = lo + Vec2(cell.x() * rng.uniform(), cell.y() * rng.uniform());
      if (member(p)) {
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

std::vector<Vec2> lhs_sample(const CandidateArea& area, int M, std::uint64_t seed) {
  auto out = lhs_sample(area.bounds(), M, seed, [&](const Vec2& p) { return area.contains(p); });
  if (out.empty()) throw EmptyArea("no sample landed in the candidate area");
  return out;
}

// ---------------------------------------------------------------------------
// Ordering

double tsp_edge(const Vec2& a, double fa, const Vec2& b, double fb, double k1, double k1_prime) {
  return k1 * (b - a).norm() + k1_prime * (fb - fa);
}

double tsp_path_cost(std::span<const Vec2> pts, std::span<const double> F, const Vec2& start,
                     std::span<const std::size_t> order, double k1, double k1_prime) {
  double cost = 0.0;
  Vec2 at = start;
  double f_at = 0.0;
  for (std::size_t i : order) {
    cost += tsp_edge(at, f_at, pts[i], F[i], k1, k1_prime);
    at = pts[i];
    f_at = F[i];
  }
  return cost;
}

namespace {

struct TspSearch {
  std::size_t n;
  // w[i][j], node n is the start.
  std::vector<std::vector<double>> w;
  std::vector<std::size_t> path, best;
  std::vector<bool> used;
  double best_cost = std::numeric_limits<double>::infinity();

  // Every unvisited node is entered exactly once, from the current node or
  // from another unvisited node; the cheapest such edge bounds the rest.
  double bound(std::size_t cur) const {
    double b = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      double m = w[cur][j];
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i] && i != j) m = std::min(m, w[i][j]);
      }
      b += m;
    }
    return b;
  }

  void dfs(std::size_t cur, double cost) {
    if (path.size() == n) {
      if (cost < best_cost) {
        best_cost = cost;
        best = path;
      }
      return;
    }
    if (cost + bound(cur) >= best_cost) return;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      path.push_back(j);
      dfs(j, cost + w[cur][j]);
      path.pop_back();
      used[j] = false;
    }
  }
};

}  // namespace

std::vector<std::size_t> open_tsp_order(std::span<const Vec2> pts, std::span<const double> F, const Vec2& start,
                                        double k1, double k1_prime) {
  const std::size_t n = pts.size();
  if (F.size() != n) throw std::invalid_argument("score count does not match candidate count");
  if (n == 0) throw std::invalid_argument("no candidates to order");
  std::vector<std::vector<double>> w(n + 1, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i <= n; ++i) {
    const Vec2& a = i < n ? pts[i] : start;
    const double fa = i < n ? F[i] : 0.0;
    for (std::size_t j = 0; j < n; ++j) w[i][j] = tsp_edge(a, fa, pts[j], F[j], k1, k1_prime);
  }

  if (n <= kExactTspLimit) {
    TspSearch s{n, std::move(w), {}, {}, std::vector<bool>(n, false)};
    s.dfs(n, 0.0);
    return s.best;
  }
  std::vector<std::size_t> order;
  std::vector<bool> used(n, false);
  std::size_t cur = n;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j] && (pick == n || w[cur][j] < w[cur][pick])) pick = j;
    }
    used[pick] = true;
    order.push_back(pick);
    cur = pick;
  }
  return order;
}

std::vector<std::vector<std::size_t>> group_candidates(std::span<const double> scores, int T) {
  if (T < 2) throw std::invalid_argument("group size must be at least 2");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < idx.size(); i += static_cast<std::size_t>(T)) {
    const auto end = std::min(idx.size(), i + static_cast<std::size_t>(T));
    groups.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(i), idx.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Verification

std::uint64_t candidate_seed(std::uint64_t seed, const Vec2& xy) {
  const auto qx = static_cast<std::uint64_t>(std::llround(xy.x() * 1000.0));
  const auto qy = static_cast<std::uint64_t>(std::llround(xy.y() * 1000.0));
  return derive_seed(seed, {qx, qy});
}

namespace {

FeasibilityResult manipulation_check(const Scene& scene, const RobotModel& robot, const TargetSpec& target,
                                     const BasePose& pose, const ObjectSet& subset, const PlannerConfig& config) {
  FeasibilityParams fp = config.feasibility;
  fp.seed = candidate_seed(config.feasibility.seed, pose.xy);
  return check_manipulation_feasibility(robot, pose, target, scene, subset, fp);
}

}  // namespace

VerifyResult verify_placement(const Scene& scene, const RobotModel& robot, const TargetSpec& target,
                              const BasePose& pose, const PlannerConfig& config) {
  VerifyResult v;
  const ObjectSet all = scene.all_ids();
  if (!footprint_on_floor(scene, robot, pose)) {
    v.stage = "floor";
    return v;
  }
  double radius = 0.0;
  try {
    radius = delta_r(robot, robot.base_dims().z(), target.position.z());
  } catch (const OutOfVerticalReach&) {
    v.stage = "reach";
    return v;
  }
  if (dist_xy(pose.xy, Vec2(target.position.head<2>())) > radius) {
    v.stage = "reach";
    return v;
  }
  const OrientedRect fp = robot.footprint_at(pose);
  for (const auto& b : collect_obstacles(scene, all, {}, config.sweep_samples)) {
    if (overlaps(fp, footprint(b))) {
      v.stage = "area";
      return v;
    }
  }
  const OccupancyGrid grid = build_occupancy(scene, all, config.nav_resolution, robot.footprint_box(),
                                             config.sweep_samples);
  v.nav = nav_path(grid, scene.start(), pose.xy);
  if (!v.nav.found()) {
    v.stage = "navigation";
    return v;
  }
  v.manipulation = manipulation_check(scene, robot, target, pose, all, config);
  if (!v.manipulation.feasible) {
    v.stage = "manipulation";
    return v;
  }
  v.ok = true;
  v.stage = "ok";
  return v;
}

// ---------------------------------------------------------------------------
// Planning

double PlanResult::total_seconds() const {
  double t = 0.0;
  for (const auto& [k, v] : timing) t += v;
  return t;
}

nlohmann::json PlanResult::to_json(bool with_timing) const {
  using nlohmann::json;
  json j;
  j["feasible"] = feasible;
  j["base_pose"] = {{"x", base_pose.xy.x()}, {"y", base_pose.xy.y()}, {"yaw", base_pose.yaw}};
  json pts = json::array();
  for (const auto& p : nav.points) pts.push_back({p.x(), p.y()});
  j["nav_path"] = {{"length", nav.length}, {"points", pts}};
  auto rows = [](const std::vector<JointVector>& qs) {
    json a = json::array();
    for (const auto& q : qs) a.push_back(std::vector<double>(q.data(), q.data() + q.size()));
    return a;
  };
  j["trajectory"] = rows(trajectory.configs);
  j["waypoint_configs"] = rows(waypoint_configs);
  j["candidates_tried"] = candidates_tried;
  j["alpha_final"] = alpha_final;
  j["alpha_history"] = alpha_history;
  j["subset_sizes"] = subset_sizes;
  j["subset"] = subset;
  j["importance"] = importance;
  if (with_timing) {
    json ms = json::object(), pct = json::object();
    const double total = total_seconds();
    for (const auto& [k, v] : timing) {
      ms[k] = v * 1000.0;
      pct[k] = total > 0.0 ? 100.0 * v / total : 0.0;
    }
    j["timing_ms"] = ms;
    j["timing_percent"] = pct;
  }
  return j;
}

void write_plan_json(const PlanResult& result, const std::filesystem::path& path, bool with_timing) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << result.to_json(with_timing).dump(2) << '\n';
}

namespace {

struct CandidateOutcome {
  bool ok = false;
  NavPath nav;
  FeasibilityResult manipulation;
};

class Round {
 public:
  Round(const Scene& scene, const RobotModel& robot, const TargetSpec& target, const PlannerConfig& config,
        const ObjectSet& subset, const OccupancyGrid& grid, std::vector<std::uint8_t> reachable)
      : scene_(scene), robot_(robot), target_(target), config_(config), subset_(subset), grid_(grid),
        reachable_(std::move(reachable)), full_(subset == scene.all_ids()) {
    if (full_) return;
    // Execution happens in the complete scene, so acceptance also needs the
    // full-scene area and navigation checks; they are cheap, so run them first.
    for (const auto& b : collect_obstacles(scene, scene.all_ids(), {}, config.sweep_samples)) {
      full_rects_.push_back(footprint(b));
    }
    full_grid_.emplace(build_occupancy(scene, scene.all_ids(), config.nav_resolution, robot.footprint_box(),
                                       config.sweep_samples));
    full_reachable_.assign(static_cast<std::size_t>(full_grid_->nx()) * full_grid_->ny(), 0);
    if (const auto sc = full_grid_->cell_at(scene.start()); sc && !full_grid_->occupied(*sc)) {
      full_reachable_ = full_grid_->reachable_from(*sc);
    }
  }

  CandidateOutcome check(const CandidateArea& area, const Vec2& xy) const {
    CandidateOutcome out;
    const BasePose pose = area.pose_at(xy);
    if (!footprint_on_floor(scene_, robot_, pose)) return out;
    if (!reachable_at(grid_, reachable_, xy)) return out;
    if (!full_) {
      const OrientedRect fp = robot_.footprint_at(pose);
      for (const auto& r : full_rects_) {
        if (overlaps(fp, r)) return out;
      }
      if (!reachable_at(*full_grid_, full_reachable_, xy)) return out;
    }
    out.manipulation = manipulation_check(scene_, robot_, target_, pose, subset_, config_);
    if (!out.manipulation.feasible) return out;
    if (!full_) {
      out.manipulation = manipulation_check(scene_, robot_, target_, pose, scene_.all_ids(), config_);
      if (!out.manipulation.feasible) return out;
    }
    out.nav = nav_path(full_ ? grid_ : *full_grid_, scene_.start(), xy);
    out.ok = out.nav.found();
    return out;
  }

 private:
  static bool reachable_at(const OccupancyGrid& g, const std::vector<std::uint8_t>& mask, const Vec2& xy) {
    const auto cell = g.cell_at(xy);
    return cell && mask[g.index(*cell)];
  }

  const Scene& scene_;
  const RobotModel& robot_;
  const TargetSpec& target_;
  const PlannerConfig& config_;
  const ObjectSet& subset_;
  const OccupancyGrid& grid_;
  std::vector<std::uint8_t> reachable_;
  bool full_;
  std::vector<Rect2> full_rects_;
  std::optional<OccupancyGrid> full_grid_;
  std::vector<std::uint8_t> full_reachable_;
};

}  // namespace

PlanResult plan(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                const PlannerConfig& config, const ReachabilityMap& irm) {
  config.validate();
  PlanResult result;
  for (const auto& s : plan_stages()) result.timing[s] = 0.0;
  const TargetSpec target = make_target(scene, target_id, config.waypoint_count);
  const ObjectSet all = scene.all_ids();
  const Vec2 start = scene.start();
  // Fails early, before any work, when the target is out of vertical reach.
  delta_r(robot, robot.base_dims().z(), target.position.z());

  auto t0 = Clock::now();
  const auto scores = predict_importance(scene, target_id, config.importance);
  result.importance = scores;
  result.timing["importance"] += seconds_since(t0);

  ObjectSet subset;
  double alpha = config.alpha_init;
  bool final_round = false;
  std::size_t round_index = 0;
  while (true) {
    t0 = Clock::now();
    // At the bottom of the schedule every object is modeled.
    const double a = final_round ? 0.0 : alpha;
    ObjectSet next = subset;
    for (const auto& id : select_objects(scores, target_id, a).selected) next.insert(id);
    // A grid round over an unchanged subset would repeat itself exactly; an
    // LHS round draws fresh samples, so it is still worth running.
    const bool changed = round_index == 0 || next != subset || config.sampling == SamplingMode::lhs;
    subset = std::move(next);
    result.timing["modeling"] += seconds_since(t0);

    if (changed) {
      result.alpha_history.push_back(a);
      result.subset_sizes.push_back(subset.size());
      result.alpha_final = a;
      result.subset = subset;

      t0 = Clock::now();
      std::optional<CandidateArea> area;
      try {
        area.emplace(candidate_area(scene, subset, robot, target.position, config.sweep_samples));
      } catch (const EmptyArea&) {
      }
      const auto occluders = collect_obstacles(scene, subset, target_id, config.sweep_samples);
      const OccupancyGrid grid =
          build_occupancy(scene, subset, config.nav_resolution, robot.footprint_box(), config.sweep_samples);
      std::vector<std::uint8_t> reachable(static_cast<std::size_t>(grid.nx()) * grid.ny(), 0);
      if (const auto sc = grid.cell_at(start); sc && !grid.occupied(*sc)) reachable = grid.reachable_from(*sc);
      result.timing["modeling"] += seconds_since(t0);

      if (area) {
        t0 = Clock::now();
        const PotentialMap pmap =
            potential_map(*area, irm, robot, target.waypoints, config.resolution, config.weights, occluders);
        result.timing["potential_field"] += seconds_since(t0);

        t0 = Clock::now();
        std::vector<Vec2> cands;
        std::vector<double> F;
        if (config.sampling == SamplingMode::grid) {
          for (const auto& c : pmap.cells) {
            if (!c.member) continue;
            cands.push_back(c.xy);
            F.push_back(c.combined);
          }
        } else {
          try {
            cands = lhs_sample(*area, config.M, derive_seed(config.seed, {round_index}));
          } catch (const EmptyArea&) {
          }
          for (const auto& c : cands) {
            F.push_back(combined_score(*area, irm, robot, c, target.waypoints, config.weights, pmap.field_max,
                                       occluders));
          }
        }
        // Cells the base cannot drive to would fail verification anyway; dropping
        // them before ordering keeps them out of the top groups.
        std::size_t kept = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
          const auto cell = grid.cell_at(cands[i]);
          if (!cell || !reachable[grid.index(*cell)]) continue;
          cands[kept] = cands[i];
          F[kept] = F[i];
          ++kept;
        }
        cands.resize(kept);
        F.resize(kept);
        std::vector<std::size_t> order;
        for (const auto& g : group_candidates(F, config.T)) {
          std::vector<Vec2> pts;
          std::vector<double> gf;
          for (std::size_t i : g) {
            pts.push_back(cands[i]);
            gf.push_back(F[i]);
          }
          for (std::size_t k : open_tsp_order(pts, gf, start, config.k1, config.k1_prime)) order.push_back(g[k]);
        }
        result.timing["sampling"] += seconds_since(t0);

        t0 = Clock::now();
        const Round round(scene, robot, target, config, subset, grid, std::move(reachable));
        const std::size_t batch = std::max(1u, config.threads);
        for (std::size_t b = 0; b < order.size(); b += batch) {
          const std::size_t end = std::min(order.size(), b + batch);
          std::vector<CandidateOutcome> outcomes(end - b);
          if (end - b == 1) {
            outcomes[0] = round.check(*area, cands[order[b]]);
          } else {
            std::vector<std::future<CandidateOutcome>> jobs;
            for (std::size_t i = b; i < end; ++i) {
              jobs.push_back(std::async(std::launch::async, [&, i] { return round.check(*area, cands[order[i]]); }));
            }
            for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
          }
          // The earliest candidate in visiting order wins, whatever finished first.
          for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (!outcomes[i].ok) continue;
            result.candidates_tried += i + 1;
            result.feasible = true;
            result.base_pose = area->pose_at(cands[order[b + i]]);
            result.nav = std::move(outcomes[i].nav);
            result.trajectory = std::move(outcomes[i].manipulation.trajectory);
            result.waypoint_configs = std::move(outcomes[i].manipulation.waypoint_configs);
            result.timing["feasibility"] += seconds_since(t0);
            return result;
          }
          result.candidates_tried += outcomes.size();
        }
        result.timing["feasibility"] += seconds_since(t0);
      }
    }

    if (final_round) return result;
    ++round_index;
    alpha *= config.alpha_decay;
    if (alpha <= config.alpha_min) final_round = true;
  }
}

std::optional<BasePose> exhaustive_oracle(const Scene& scene, const RobotModel& robot, const std::string& target_id,
                                          const PlannerConfig& config) {
  const TargetSpec target = make_target(scene, target_id, config.waypoint_count);
  std::optional<CandidateArea> area;
  try {
    area.emplace(candidate_area(scene, scene.all_ids(), robot, target.position, config.sweep_samples));
  } catch (const EmptyArea&) {
    return std::nullopt;
  }
  for (const auto& xy : area->member_cells(config.resolution)) {
    const BasePose pose = area->pose_at(xy);
    if (verify_placement(scene, robot, target, pose, config).ok) return pose;
  }
  return std::nullopt;
}

}  // namespace momapos
