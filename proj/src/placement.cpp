#include "momapos/placement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "momapos/errors.hpp"

namespace momapos {

TargetSpec make_target(const Scene& scene, const std::string& id, int waypoint_count) {
  const ObjectInstance& obj = scene.at(id);
  TargetSpec t;
  t.id = id;
  t.position = obj.position;
  t.articulated = obj.articulated();
  if (t.articulated) {
    t.waypoints = handle_waypoints(obj, waypoint_count);
    t.angles = waypoint_angles(obj, waypoint_count);
  } else {
    t.waypoints = {obj.position};
  }
  return t;
}

std::vector<Aabb> collect_obstacles(const Scene& scene, const ObjectSet& subset,
                                    const std::string& exclude_id, int sweep_samples) {
  std::vector<Aabb> out;
  for (const auto& o : scene.objects()) {
    if (o.id == exclude_id || !subset.count(o.id)) continue;
    out.push_back(o.bbox);
    if (o.articulated()) {
      for (const auto& b : swept_obstacles(o, sweep_samples)) out.push_back(b);
    }
  }
  return out;
}

CandidateArea::CandidateArea(Vec2 center, double radius, Vec2 half_extents, std::vector<Rect2> obstacles)
    : center_(center), radius_(radius), half_extents_(half_extents), obstacles_(std::move(obstacles)) {}

Rect2 CandidateArea::bounds() const {
  return Rect2{center_ - Vec2::Constant(radius_), center_ + Vec2::Constant(radius_)};
}

BasePose CandidateArea::pose_at(const Vec2& xy) const { return BasePose{xy, yaw_facing(xy, center_)}; }

bool CandidateArea::within_reach(const Vec2& xy) const { return dist_xy(xy, center_) <= radius_; }

bool CandidateArea::collision_free(const Vec2& xy) const {
  const OrientedRect fp{xy, half_extents_, yaw_facing(xy, center_)};
  return std::none_of(obstacles_.begin(), obstacles_.end(), [&](const Rect2& r) { return overlaps(fp, r); });
}

int CandidateArea::half_cells(double resolution) const {
  return static_cast<int>(std::floor(radius_ / resolution + 1e-9));
}

std::vector<Vec2> CandidateArea::lattice(double resolution) const {
  const int n = half_cells(resolution);
  std::vector<Vec2> out;
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) out.push_back(center_ + resolution * Vec2(i, j));
  }
  return out;
}

std::vector<Vec2> CandidateArea::member_cells(double resolution) const {
  std::vector<Vec2> out;
  for (const auto& p : lattice(resolution)) {
    if (contains(p)) out.push_back(p);
  }
  return out;
}

CandidateArea candidate_area(const Scene& scene, const ObjectSet& subset, const RobotModel& robot,
                             const Vec3& target, int sweep_samples) {
  if (!scene.floor().contains(target.head<2>())) throw std::invalid_argument("target outside the floor");
  const double radius = delta_r(robot, robot.base_dims().z(), target.z());
  std::vector<Rect2> rects;
  for (const auto& b : collect_obstacles(scene, subset, {}, sweep_samples)) rects.push_back(footprint(b));
  CandidateArea area(target.head<2>(), radius, 0.5 * robot.base_dims().head<2>(), std::move(rects));
  if (area.member_cells(kAreaResolution).empty()) throw EmptyArea("no base placement within reach");
  return area;
}

bool line_of_sight_clear(std::span<const Aabb> occluders, const Vec3& p, const Vec3& q) {
  return std::none_of(occluders.begin(), occluders.end(),
                      [&](const Aabb& b) { return segment_intersects(p, q, b); });
}

bool line_of_sight_clear(const Scene& scene, const ObjectSet& subset, const Vec3& p, const Vec3& q,
                         const std::string& exclude_id) {
  const auto occ = collect_obstacles(scene, subset, exclude_id);
  return line_of_sight_clear(occ, p, q);
}

double field_value(std::span<const Aabb> occluders, const Vec2& candidate, double sample_z,
                   const Vec3& waypoint) {
  const Vec3 from(candidate.x(), candidate.y(), sample_z);
  if (!line_of_sight_clear(occluders, from, waypoint)) return 0.0;
  return 1.0 / std::max(dist_xy(candidate, Vec2(waypoint.head<2>())), kMinFieldDistance);
}

double field_value(const Scene& scene, const ObjectSet& subset, const Vec2& candidate, double sample_z,
                   const Vec3& waypoint, const std::string& exclude_id) {
  const auto occ = collect_obstacles(scene, subset, exclude_id);
  return field_value(occ, candidate, sample_z, waypoint);
}

ScoreWeights ScoreWeights::normalized() const {
  const double total = irm + field;
  if (!(total > 0.0) || irm < 0.0 || field < 0.0) throw std::invalid_argument("weights must be nonnegative");
  return {irm / total, field / total};
}

double field_sum(std::span<const Aabb> occluders, const Vec2& candidate, std::span<const Vec3> waypoints) {
  double sum = 0.0;
  for (const auto& w : waypoints) sum += field_value(occluders, candidate, w.z(), w);
  return sum;
}

double irm_mean(const CandidateArea& area, const ReachabilityMap& irm, const RobotModel& robot,
                const Vec2& candidate, std::span<const Vec3> waypoints) {
  const BasePose pose = area.pose_at(candidate);
  double sum = 0.0;
  for (const auto& w : waypoints) sum += irm_query(irm, pose, robot.mount_height(), w);
  return sum / static_cast<double>(waypoints.size());
}

double combined_score(const CandidateArea& area, const ReachabilityMap& irm, const RobotModel& robot,
                      const Vec2& candidate, std::span<const Vec3> waypoints, const ScoreWeights& weights,
                      double field_max, std::span<const Aabb> occluders) {
  if (waypoints.empty()) throw std::invalid_argument("no waypoints");
  if (!area.contains(candidate)) throw NotInArea("candidate is not in the area");
  const ScoreWeights w = weights.normalized();
  const double f = field_sum(occluders, candidate, waypoints);
  const double f_norm = field_max > 0.0 ? std::min(1.0, f / field_max) : 0.0;
  return w.irm * irm_mean(area, irm, robot, candidate, waypoints) + w.field * f_norm;
}

const PotentialCell* PotentialMap::best() const {
  const PotentialCell* top = nullptr;
  for (const auto& c : cells) {
    if (c.member && (!top || c.combined > top->combined)) top = &c;
  }
  return top;
}

std::size_t PotentialMap::member_count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.member; }));
}

PotentialMap potential_map(const CandidateArea& area, const ReachabilityMap& irm, const RobotModel& robot,
                           std::span<const Vec3> waypoints, double resolution, const ScoreWeights& weights,
                           std::span<const Aabb> occluders) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  if (waypoints.empty()) throw std::invalid_argument("no waypoints");
  PotentialMap map;
  map.center = area.center();
  map.resolution = resolution;
  map.half_cells = area.half_cells(resolution);
  if (map.half_cells < 1) throw ResolutionTooCoarse("potential map would be a single cell");
  map.delta_r = area.radius();
  map.weights = weights.normalized();

  for (const auto& xy : area.lattice(resolution)) {
    PotentialCell c;
    c.xy = xy;
    c.member = area.contains(xy);
    if (c.member) {
      c.field = field_sum(occluders, xy, waypoints);
      c.irm = irm_mean(area, irm, robot, xy, waypoints);
      map.field_max = std::max(map.field_max, c.field);
    }
    map.cells.push_back(c);
  }
  for (auto& c : map.cells) {
    if (!c.member) continue;
    const double f_norm = map.field_max > 0.0 ? c.field / map.field_max : 0.0;
    c.combined = map.weights.irm * c.irm + map.weights.field * f_norm;
  }
  return map;
}

void PotentialMap::write_pgm(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  double top = 0.0;
  for (const auto& c : cells) top = std::max(top, c.combined);
  const int n = side();
  out << "P5\n"
      << "# weights irm=" << weights.irm << " field=" << weights.field << "\n"
      << "# resolution " << resolution << " delta_r " << delta_r << "\n"
      << "# center " << center.x() << ' ' << center.y() << "\n"
      << n << ' ' << n << "\n255\n";
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) {
      const double v = top > 0.0 ? at(i, j).combined / top : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
}

std::string PotentialMap::csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "# weights irm=" << weights.irm << " field=" << weights.field << " resolution=" << resolution
      << " delta_r=" << delta_r << "\n";
  out << "x,y,member,field,irm,combined\n";
  for (const auto& c : cells) {
    out << c.xy.x() << ',' << c.xy.y() << ',' << (c.member ? 1 : 0) << ',' << c.field << ',' << c.irm << ','
        << c.combined << '\n';
  }
  return out.str();
}

void PotentialMap::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << csv();
}

}  // namespace momapos
