#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "momapos/geometry.hpp"
#include "momapos/kinematics.hpp"
#include "momapos/reachability.hpp"
#include "momapos/scene.hpp"

namespace momapos {

inline constexpr double kMinFieldDistance = 0.05;
inline constexpr double kAreaResolution = 0.05;
inline constexpr int kArticulatedWaypoints = 10;

/// What the arm has to visit: one grasp point for a rigid object, handle
/// positions along the opening arc for an articulated one.
struct TargetSpec {
  std::string id;
  Vec3 position = Vec3::Zero();
  bool articulated = false;
  std::vector<Vec3> waypoints;
  /// Opening angle per waypoint (articulated only).
  std::vector<double> angles;
};

TargetSpec make_target(const Scene& scene, const std::string& id,
                       int waypoint_count = kArticulatedWaypoints);

/// Boxes of every object in `subset` plus the swept boxes of articulated
/// ones, skipping `exclude_id`.
std::vector<Aabb> collect_obstacles(const Scene& scene, const ObjectSet& subset,
                                    const std::string& exclude_id = {},
                                    int sweep_samples = kDefaultSweepSamples);

/// Base positions within horizontal reach of the target whose footprint, at
/// the yaw facing the target, clears every obstacle footprint.
class CandidateArea {
 public:
  CandidateArea(Vec2 center, double radius, Vec2 half_extents, std::vector<Rect2> obstacles);

  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  Rect2 bounds() const;
  const std::vector<Rect2>& obstacles() const { return obstacles_; }

  BasePose pose_at(const Vec2& xy) const;
  bool within_reach(const Vec2& xy) const;
  bool collision_free(const Vec2& xy) const;
  bool contains(const Vec2& xy) const { return within_reach(xy) && collision_free(xy); }

  /// Lattice anchored at the center: center + (i, j) * resolution with
  /// |i|, |j| <= floor(radius / resolution).
  int half_cells(double resolution) const;
  std::vector<Vec2> lattice(double resolution) const;
  std::vector<Vec2> member_cells(double resolution) const;

 private:
  Vec2 center_;
  double radius_;
  Vec2 half_extents_;
  std::vector<Rect2> obstacles_;
};

/// Throws OutOfVerticalReach, or EmptyArea when no lattice cell at 5 cm is a member.
CandidateArea candidate_area(const Scene& scene, const ObjectSet& subset, const RobotModel& robot,
                             const Vec3& target, int sweep_samples = kDefaultSweepSamples);

bool line_of_sight_clear(std::span<const Aabb> occluders, const Vec3& p, const Vec3& q);
/// Occluders are the boxes and swept boxes of `subset`, minus `exclude_id`.
bool line_of_sight_clear(const Scene& scene, const ObjectSet& subset, const Vec3& p, const Vec3& q,
                         const std::string& exclude_id = {});

/// 1 / max(dist_xy, 5 cm) toward the waypoint, or 0 when the line from
/// (candidate, sample_z) to the waypoint is blocked.
double field_value(std::span<const Aabb> occluders, const Vec2& candidate, double sample_z,
                   const Vec3& waypoint);
double field_value(const Scene& scene, const ObjectSet& subset, const Vec2& candidate, double sample_z,
                   const Vec3& waypoint, const std::string& exclude_id = {});

struct ScoreWeights {
  double irm = 0.5;
  double field = 0.5;
  ScoreWeights normalized() const;
};

/// Sum of field values over the waypoints, each sampled at the waypoint's height.
double field_sum(std::span<const Aabb> occluders, const Vec2& candidate, std::span<const Vec3> waypoints);
/// Mean IRM score over the waypoints for a base at `candidate` facing the area center.
double irm_mean(const CandidateArea& area, const ReachabilityMap& irm, const RobotModel& robot,
                const Vec2& candidate, std::span<const Vec3> waypoints);

/// w_irm * irm_mean + w_f * field_sum / field_max. Throws NotInArea.
double combined_score(const CandidateArea& area, const ReachabilityMap& irm, const RobotModel& robot,
                      const Vec2& candidate, std::span<const Vec3> waypoints, const ScoreWeights& weights,
                      double field_max, std::span<const Aabb> occluders);

struct PotentialCell {
  Vec2 xy = Vec2::Zero();
  bool member = false;
  double field = 0.0;
  double irm = 0.0;
  double combined = 0.0;
};

struct PotentialMap {
  Vec2 center = Vec2::Zero();
  double resolution = kAreaResolution;
  int half_cells = 0;
  double delta_r = 0.0;
  ScoreWeights weights;
  double field_max = 0.0;
  /// Row-major, row j (y) outer, column i (x) inner; side = 2 * half_cells + 1.
  std::vector<PotentialCell> cells;

  int side() const { return 2 * half_cells + 1; }
  const PotentialCell& at(int i, int j) const { return cells[static_cast<std::size_t>(j) * side() + i]; }
  /// Member cell with the highest combined score (first in row-major order on ties).
  const PotentialCell* best() const;
  std::size_t member_count() const;

  void write_pgm(const std::filesystem::path& path) const;
  void write_csv(const std::filesystem::path& path) const;
  std::string csv() const;
};

PotentialMap potential_map(const CandidateArea& area, const ReachabilityMap& irm, const RobotModel& robot,
                           std::span<const Vec3> waypoints, double resolution, const ScoreWeights& weights,
                           std::span<const Aabb> occluders);

}  // namespace momapos
