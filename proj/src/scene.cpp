#include "momapos/scene.hpp"

#include <cmath>
#include <numbers>
#include <fstream>
#include <map>
#include <sstream>

#include "momapos/errors.hpp"

namespace momapos {

namespace {

using nlohmann::json;

constexpr double kCentroidTol = 1e-6;

void validate_joint(const ObjectInstance& obj) {
  const JointSpec& j = *obj.joint;
  if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
    throw ValidationError("object '" + obj.id + "': joint axis is not unit length");
  }
  if (j.angle_min != 0.0) {
    throw ValidationError("object '" + obj.id + "': joint range must start at 0");
  }
  if (j.angle_max < 0.0 || j.angle_max > std::numbers::pi) {
    throw ValidationError("object '" + obj.id + "': joint range must lie in [0, pi]");
  }
  if (!j.panel_home.valid()) {
    throw ValidationError("object '" + obj.id + "': inverted panel box");
  }
  const Vec3 e = j.panel_home.extents();
  const int positive = (e.x() > 0) + (e.y() > 0) + (e.z() > 0);
  if (positive < 2) {
    throw ValidationError("object '" + obj.id + "': degenerate door panel");
  }
}

bool has_cycle(const std::vector<ObjectInstance>& objects,
               const std::vector<SpatialRelation>& relations) {
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& r : relations) children[r.parent_id].push_back(r.child_id);
  std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
  auto visit = [&](auto&& self, const std::string& id) -> bool {
    state[id] = 1;
    for (const auto& c : children[id]) {
      if (state[c] == 1) return true;
      if (state[c] == 0 && self(self, c)) return true;
    }
    state[id] = 2;
    return false;
  };
  for (const auto& o : objects) {
    if (state[o.id] == 0 && visit(visit, o.id)) return true;
  }
  return false;
}

Vec3 read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(std::string(what) + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec2 read_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ParseError(std::string(what) + ": expected [x, y]");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Aabb read_box(const json& j, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + ": expected {min, max}");
  return Aabb{read_vec3(j.at("min"), what), read_vec3(j.at("max"), what)};
}

json write_vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json write_vec(const Vec2& v) { return json::array({v.x(), v.y()}); }
json write_box(const Aabb& b) { return {{"min", write_vec(b.min)}, {"max", write_vec(b.max)}}; }

RelationType read_relation(const std::string& s) {
  if (s == "on") return RelationType::on;
  if (s == "in") return RelationType::in;
  if (s == "inside") return RelationType::inside;
  throw ParseError("unknown relation '" + s + "'");
}

const char* relation_name(RelationType r) {
  switch (r) {
    case RelationType::on: return "on";
    case RelationType::in: return "in";
    case RelationType::inside: return "inside";
  }
  return "on";
}

}  // namespace

Scene::Scene(std::vector<ObjectInstance> objects, std::vector<SpatialRelation> relations,
             Rect2 floor, std::optional<Vec2> start)
    : objects_(std::move(objects)),
      relations_(std::move(relations)),
      floor_(floor),
      start_(start) {
  if (!floor_.valid()) throw ValidationError("inverted floor extent");
  std::set<std::string> ids;
  for (const auto& o : objects_) {
    if (o.id.empty()) throw ValidationError("object with empty id");
    if (!ids.insert(o.id).second) throw ValidationError("duplicate object id '" + o.id + "'");
    if (!o.bbox.valid()) throw ValidationError("object '" + o.id + "': inverted bounding box");
    if ((o.position - o.bbox.center()).norm() > kCentroidTol) {
      throw ValidationError("object '" + o.id + "': position is not the box centroid");
    }
    if (o.articulated() != o.joint.has_value()) {
      throw ValidationError("object '" + o.id + "': joint must be present iff articulated");
    }
    if (o.joint) validate_joint(o);
    const Rect2 fp = footprint(o.bbox);
    if (!floor_.contains(fp.min, 1e-9) || !floor_.contains(fp.max, 1e-9)) {
      throw ValidationError("object '" + o.id + "': footprint leaves the floor");
    }
  }
  for (const auto& r : relations_) {
    if (!ids.count(r.parent_id) || !ids.count(r.child_id)) {
      throw ValidationError("relation references unknown object '" +
                            (ids.count(r.parent_id) ? r.child_id : r.parent_id) + "'");
    }
    if (r.parent_id == r.child_id) throw ValidationError("self relation on '" + r.parent_id + "'");
  }
  if (has_cycle(objects_, relations_)) throw ValidationError("relation graph has a cycle");
  if (start_ && !floor_.contains(*start_)) throw ValidationError("start lies outside the floor");
}

Vec2 Scene::start() const {
  if (start_) return *start_;
  return (floor_.min + Vec2(0.5, 0.5)).cwiseMin(floor_.max);
}

const ObjectInstance* Scene::find(const std::string& id) const {
  for (const auto& o : objects_) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const ObjectInstance& Scene::at(const std::string& id) const {
  const auto* o = find(id);
  if (!o) throw UnknownTarget("no object '" + id + "' in scene");
  return *o;
}

std::optional<std::size_t> Scene::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (objects_[i].id == id) return i;
  }
  return std::nullopt;
}

ObjectSet Scene::all_ids() const {
  ObjectSet s;
  for (const auto& o : objects_) s.insert(o.id);
  return s;
}

Scene parse_scene(const json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("scene document must be an object");
    const json& fl = doc.at("floor");
    const Rect2 floor{read_vec2(fl.at("min"), "floor.min"), read_vec2(fl.at("max"), "floor.max")};

    std::vector<ObjectInstance> objects;
    for (const json& jo : doc.at("objects")) {
      ObjectInstance o;
      o.id = jo.at("id").get<std::string>();
      o.bbox = read_box(jo.at("bbox"), "bbox");
      o.position = jo.contains("position") ? read_vec3(jo["position"], "position") : o.bbox.center();
      const std::string kind = jo.value("kind", "rigid");
      if (kind == "rigid") {
        o.kind = ObjectKind::rigid;
      } else if (kind == "articulated") {
        o.kind = ObjectKind::articulated;
      } else {
        throw ParseError("object '" + o.id + "': unknown kind '" + kind + "'");
      }
      if (jo.contains("joint")) {
        const json& jj = jo["joint"];
        JointSpec j;
        j.pivot = read_vec3(jj.at("pivot"), "joint.pivot");
        j.axis = read_vec3(jj.at("axis"), "joint.axis");
        j.handle_home = read_vec3(jj.at("handle_home"), "joint.handle_home");
        j.panel_home = read_box(jj.at("panel_home"), "joint.panel_home");
        if (jj.contains("angle_range")) {
          j.angle_min = jj["angle_range"].at(0).get<double>();
          j.angle_max = jj["angle_range"].at(1).get<double>();
        }
        const std::string side = jj.value("hinge_side", "left");
        if (side == "left") {
          j.hinge_side = HingeSide::left;
        } else if (side == "right") {
          j.hinge_side = HingeSide::right;
        } else {
          throw ParseError("object '" + o.id + "': unknown hinge_side '" + side + "'");
        }
        o.joint = j;
      }
      objects.push_back(std::move(o));
    }

    std::vector<SpatialRelation> relations;
    if (doc.contains("relations")) {
      for (const json& jr : doc["relations"]) {
        relations.push_back({jr.at("parent").get<std::string>(), jr.at("child").get<std::string>(),
                             read_relation(jr.value("relation", "on"))});
      }
    }
    std::optional<Vec2> start;
    if (doc.contains("start")) start = read_vec2(doc["start"], "start");
    return Scene(std::move(objects), std::move(relations), floor, start);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scene: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_scene(doc);
}

json scene_to_json(const Scene& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects()) {
    json jo = {{"id", o.id},
               {"position", write_vec(o.position)},
               {"bbox", write_box(o.bbox)},
               {"kind", o.articulated() ? "articulated" : "rigid"}};
    if (o.joint) {
      const JointSpec& j = *o.joint;
      jo["joint"] = {{"pivot", write_vec(j.pivot)},
                     {"axis", write_vec(j.axis)},
                     {"handle_home", write_vec(j.handle_home)},
                     {"panel_home", write_box(j.panel_home)},
                     {"angle_range", json::array({j.angle_min, j.angle_max})},
                     {"hinge_side", j.hinge_side == HingeSide::left ? "left" : "right"}};
    }
    objects.push_back(std::move(jo));
  }
  json relations = json::array();
  for (const auto& r : scene.relations()) {
    relations.push_back(
        {{"parent", r.parent_id}, {"child", r.child_id}, {"relation", relation_name(r.relation)}});
  }
  json doc = {{"floor", {{"min", write_vec(scene.floor().min)}, {"max", write_vec(scene.floor().max)}}},
              {"objects", std::move(objects)},
              {"relations", std::move(relations)}};
  if (scene.declared_start()) doc["start"] = write_vec(*scene.declared_start());
  return doc;
}

std::string serialize_scene(const Scene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_scene(scene);
}

std::vector<double> waypoint_angles(const ObjectInstance& obj, int count) {
  if (!obj.joint) throw NotArticulated("object '" + obj.id + "' is not articulated");
  if (count < 1) throw std::invalid_argument("waypoint count must be positive");
  const JointSpec& j = *obj.joint;
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) {
    out[k] = count == 1 ? j.angle_min
                        : j.angle_min + k * (j.angle_max - j.angle_min) / (count - 1);
  }
  return out;
}

std::vector<Vec3> handle_waypoints(const ObjectInstance& obj, int count) {
  if (!obj.joint) throw NotArticulated("object '" + obj.id + "' is not articulated");
  if (count < 2) throw std::invalid_argument("handle_waypoints needs at least 2 points");
  const JointSpec& j = *obj.joint;
  std::vector<Vec3> out;
  out.reserve(count);
  for (double theta : waypoint_angles(obj, count)) {
    out.push_back(theta == 0.0 ? j.handle_home
                               : rotate_about(j.handle_home, j.pivot, j.axis, j.signed_angle(theta)));
  }
  return out;
}

Aabb panel_box_at(const ObjectInstance& obj, double theta) {
  if (!obj.joint) throw NotArticulated("object '" + obj.id + "' is not articulated");
  const JointSpec& j = *obj.joint;
  if (theta == 0.0) return j.panel_home;
  std::array<Vec3, 8> corners = j.panel_home.corners();
  for (auto& c : corners) c = rotate_about(c, j.pivot, j.axis, j.signed_angle(theta));
  return Aabb::from_points(corners);
}

namespace {

// Grows `box` by the arc that `point` traces about (pivot, axis) over the
// signed angles [a0, a1]: endpoints plus any per-axis extremum inside.
void expand_by_arc(Aabb& box, const Vec3& point, const Vec3& pivot, const Vec3& axis, double a0, double a1) {
  const Vec3 rel = point - pivot;
  const Vec3 along = axis * axis.dot(rel);
  const Vec3 u = rel - along;
  const Vec3 v = axis.cross(u);
  box.expand(rotate_about(point, pivot, axis, a0));
  box.expand(rotate_about(point, pivot, axis, a1));
  const double lo = std::min(a0, a1), hi = std::max(a0, a1);
  for (int k = 0; k < 3; ++k) {
    // Coordinate k is along_k + u_k cos(phi) + v_k sin(phi).
    if (u[k] == 0.0 && v[k] == 0.0) continue;
    const double peak = std::atan2(v[k], u[k]);
    for (double phi : {peak, peak + std::numbers::pi}) {
      // Shift phi by multiples of 2 pi into [lo, lo + 2 pi).
      phi = lo + std::fmod(std::fmod(phi - lo, 2.0 * std::numbers::pi) + 2.0 * std::numbers::pi,
                           2.0 * std::numbers::pi);
      if (phi <= hi) box.expand(pivot + along + u * std::cos(phi) + v * std::sin(phi));
    }
  }
}

}  // namespace

std::vector<Aabb> swept_obstacles(const ObjectInstance& obj, int count) {
  if (!obj.joint) throw NotArticulated("object '" + obj.id + "' is not articulated");
  const JointSpec& j = *obj.joint;
  const std::vector<double> angles = waypoint_angles(obj, count);
  std::vector<Aabb> out;
  out.push_back(panel_box_at(obj, angles.front()));
  for (std::size_t i = 1; i < angles.size(); ++i) {
    // Box i covers the panel over [theta_{i-1}, theta_i], so the union holds
    // the whole sweep, not just the sampled poses.
    Aabb box = panel_box_at(obj, angles[i]);
    const double a0 = j.signed_angle(angles[i - 1]), a1 = j.signed_angle(angles[i]);
    for (const Vec3& c : j.panel_home.corners()) expand_by_arc(box, c, j.pivot, j.axis, a0, a1);
    out.push_back(box);
  }
  return out;
}

}  // namespace momapos
