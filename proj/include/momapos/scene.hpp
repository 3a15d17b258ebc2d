#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "momapos/geometry.hpp"

namespace momapos {

using ObjectSet = std::set<std::string>;

enum class ObjectKind { rigid, articulated };
enum class HingeSide { left, right };
enum class RelationType { on, in, inside };

/// Single revolute joint of an articulated object (a door). The panel swings
/// by +theta about `axis` for a left hinge and by -theta for a right hinge.
struct JointSpec {
  Vec3 pivot = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  Vec3 handle_home = Vec3::Zero();
  Aabb panel_home;
  double angle_min = 0.0;
  double angle_max = std::numbers::pi / 2.0;
  HingeSide hinge_side = HingeSide::left;

  double signed_angle(double theta) const {
    return hinge_side == HingeSide::left ? theta : -theta;
  }
  bool operator==(const JointSpec&) const = default;
};

struct ObjectInstance {
  std::string id;
  Vec3 position = Vec3::Zero();
  Aabb bbox;
  ObjectKind kind = ObjectKind::rigid;
  std::optional<JointSpec> joint;

  bool articulated() const { return kind == ObjectKind::articulated; }
  bool operator==(const ObjectInstance&) const = default;
};

struct SpatialRelation {
  std::string parent_id;
  std::string child_id;
  RelationType relation = RelationType::on;
  bool operator==(const SpatialRelation&) const = default;
};

/// Immutable environment. The constructor enforces every structural invariant
/// and throws ValidationError otherwise.
class Scene {
 public:
  Scene(std::vector<ObjectInstance> objects, std::vector<SpatialRelation> relations,
        Rect2 floor, std::optional<Vec2> start = std::nullopt);

  const std::vector<ObjectInstance>& objects() const { return objects_; }
  const std::vector<SpatialRelation>& relations() const { return relations_; }
  const Rect2& floor() const { return floor_; }
  /// Robot start position; defaults to half a meter in from the floor's min corner.
  Vec2 start() const;
  const std::optional<Vec2>& declared_start() const { return start_; }

  std::size_t size() const { return objects_.size(); }
  const ObjectInstance* find(const std::string& id) const;
  const ObjectInstance& at(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;
  ObjectSet all_ids() const;

  bool operator==(const Scene&) const = default;

 private:
  std::vector<ObjectInstance> objects_;
  std::vector<SpatialRelation> relations_;
  Rect2 floor_;
  std::optional<Vec2> start_;
};

Scene parse_scene(const nlohmann::json& doc);
Scene load_scene(const std::filesystem::path& path);
nlohmann::json scene_to_json(const Scene& scene);
std::string serialize_scene(const Scene& scene);
void save_scene(const Scene& scene, const std::filesystem::path& path);

/// Evenly spaced opening angles theta_j over the joint range, j = 0..count-1.
std::vector<double> waypoint_angles(const ObjectInstance& obj, int count);

/// Handle positions along the opening arc.
std::vector<Vec3> handle_waypoints(const ObjectInstance& obj, int count);

/// Enclosing box of the door panel rotated to opening angle theta.
Aabb panel_box_at(const ObjectInstance& obj, double theta);

/// Box j encloses the panel over [theta_{j-1}, theta_j] (box 0 is the closed
/// panel), so the union covers the whole sweep.
std::vector<Aabb> swept_obstacles(const ObjectInstance& obj, int count);

inline constexpr int kDefaultSweepSamples = 10;

}  // namespace momapos
