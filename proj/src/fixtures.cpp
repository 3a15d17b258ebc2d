#include "momapos/fixtures.hpp"

#include <algorithm>

#include "momapos/random.hpp"

namespace momapos {

ObjectInstance make_box(const std::string& id, const Vec3& min, const Vec3& max) {
  ObjectInstance o;
  o.id = id;
  o.bbox = Aabb{min, max};
  o.position = o.bbox.center();
  return o;
}

ObjectInstance make_appliance(const ApplianceSpec& s) {
  const double t = s.door_thickness;
  ObjectInstance o = make_box(s.id, Vec3(s.x0, s.y_front - t, s.z0),
                              Vec3(s.x0 + s.width, s.y_front + s.depth, s.z0 + s.height));
  o.kind = ObjectKind::articulated;
  JointSpec j;
  j.hinge_side = s.hinge;
  // The door opens outward (toward -y) about a vertical axis at its outer
  // front corner; with this axis both hinge sides swing the right way.
  j.axis = Vec3(0.0, 0.0, -1.0);
  const bool right = s.hinge == HingeSide::right;
  j.pivot = Vec3(right ? s.x0 + s.width : s.x0, s.y_front - t, s.z0);
  j.panel_home = Aabb{Vec3(s.x0, s.y_front - t, s.z0 + 0.02), Vec3(s.x0 + s.width, s.y_front, s.z0 + s.height)};
  j.handle_home = Vec3(right ? s.x0 + s.handle_inset : s.x0 + s.width - s.handle_inset, s.y_front - t - s.handle_proud,
                       s.handle_z);
  j.angle_min = 0.0;
  j.angle_max = s.max_angle;
  o.joint = j;
  return o;
}

namespace {

SpatialRelation on(const std::string& parent, const std::string& child) {
  return {parent, child, RelationType::on};
}

bool clear_of(const Rect2& r, const std::vector<ObjectInstance>& objs, double gap) {
  for (const auto& o : objs) {
    const Rect2 f = footprint(o.bbox);
    if (r.min.x() < f.max.x() + gap && f.min.x() < r.max.x() + gap && r.min.y() < f.max.y() + gap &&
        f.min.y() < r.max.y() + gap) {
      return false;
    }
  }
  return true;
}

}  // namespace

Scene fridge_fixture(int variant) {
  Rng rng(derive_seed(0xF1D6E, {static_cast<std::uint64_t>(variant)}));
  const double W = rng.uniform(4.0, 5.0);
  const double L = rng.uniform(4.0, 4.5);
  ApplianceSpec f;
  f.id = kFridgeTarget;
  f.hinge = variant % 2 == 0 ? HingeSide::right : HingeSide::left;
  f.width = rng.uniform(0.46, 0.52);
  f.depth = rng.uniform(0.6, 0.7);
  f.height = rng.uniform(1.7, 1.85);
  f.handle_z = rng.uniform(0.95, 1.1);
  f.handle_inset = rng.uniform(0.04, 0.06);
  f.y_front = L - 0.02 - f.depth;
  const double counter_w = rng.uniform(0.8, 1.2);
  double counter_x0 = 0.0;
  if (f.hinge == HingeSide::right) {
    // Handle side (left) stays open; the counter sits on the hinge side.
    f.x0 = rng.uniform(1.2, W - 3.4 + 1.2);
    counter_x0 = f.x0 + f.width + 0.02;
  } else {
    f.x0 = rng.uniform(2.3, W - 1.2 - f.width);
    counter_x0 = f.x0 - 0.02 - counter_w;
  }
  std::vector<ObjectInstance> objs;
  objs.push_back(make_appliance(f));
  const double cy0 = L - 0.62, cy1 = L - 0.02;
  objs.push_back(make_box("counter", Vec3(counter_x0, cy0, 0.0), Vec3(counter_x0 + counter_w, cy1, 0.9)));
  const double kx = counter_x0 + rng.uniform(0.1, counter_w - 0.3);
  objs.push_back(make_box("kettle", Vec3(kx, cy0 + 0.2, 0.9), Vec3(kx + 0.18, cy0 + 0.38, 1.15)));
  return Scene(std::move(objs), {on("counter", "kettle")}, Rect2{Vec2(0, 0), Vec2(W, L)}, Vec2(0.6, 0.6));
}

Scene open_table_fixture(int variant) {
  Rng rng(derive_seed(0x7AB1E, {static_cast<std::uint64_t>(variant)}));
  const Vec2 c(rng.uniform(1.7, 2.3), rng.uniform(1.7, 2.3));
  const double w = rng.uniform(0.9, 1.4), d = rng.uniform(0.6, 0.8), h = rng.uniform(0.72, 0.78);
  std::vector<ObjectInstance> objs;
  objs.push_back(make_box("table", Vec3(c.x() - w / 2, c.y() - d / 2, 0.0), Vec3(c.x() + w / 2, c.y() + d / 2, h)));
  const Vec2 lo(c.x() - w / 2 + 0.1, c.y() - d / 2 + 0.1), hi(c.x() + w / 2 - 0.1, c.y() + d / 2 - 0.1);
  const Vec2 apple(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
  objs.push_back(make_box(kTableTarget, Vec3(apple.x() - 0.04, apple.y() - 0.04, h),
                          Vec3(apple.x() + 0.04, apple.y() + 0.04, h + 0.08)));
  std::vector<SpatialRelation> rel{on("table", kTableTarget)};
  const std::vector<std::pair<std::string, Vec3>> items{{"cup", Vec3(0.08, 0.08, 0.1)},
                                                        {"book", Vec3(0.2, 0.15, 0.04)},
                                                        {"bowl", Vec3(0.16, 0.16, 0.07)},
                                                        {"bottle", Vec3(0.07, 0.07, 0.25)}};
  const int count = 2 + static_cast<int>(rng.index(3));
  for (int k = 0; k < count; ++k) {
    const auto& [name, size] = items[k];
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Vec2 p(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
      const Rect2 r{p - size.head<2>() / 2, p + size.head<2>() / 2};
      if ((p - apple).norm() < 0.2) continue;
      std::vector<ObjectInstance> on_top(objs.begin() + 1, objs.end());
      if (!clear_of(r, on_top, 0.03)) continue;
      objs.push_back(make_box(name, Vec3(r.min.x(), r.min.y(), h), Vec3(r.max.x(), r.max.y(), h + size.z())));
      rel.push_back(on("table", name));
      break;
    }
  }
  return Scene(std::move(objs), std::move(rel), Rect2{Vec2(0, 0), Vec2(4, 4)}, Vec2(0.5, 0.5));
}

Scene desk_scene(std::uint64_t seed) {
  Rng rng(derive_seed(0xDE5C, {seed}));
  const double side = rng.uniform(3.5, 4.5);
  const Rect2 floor{Vec2(0, 0), Vec2(side, side)};
  const Vec2 start(0.4, 0.4);
  const int mode = static_cast<int>(seed % 5);

  std::vector<ObjectInstance> objs;
  std::vector<SpatialRelation> rel;
  const double dw = rng.uniform(1.2, 1.6), dd = rng.uniform(0.6, 0.8), dh = rng.uniform(0.72, 0.76);
  const Vec2 dc(rng.uniform(1.5, side - 1.3), rng.uniform(1.5, side - 1.3));
  const Rect2 desk{dc - Vec2(dw / 2, dd / 2), dc + Vec2(dw / 2, dd / 2)};
  objs.push_back(make_box("desk", Vec3(desk.min.x(), desk.min.y(), 0), Vec3(desk.max.x(), desk.max.y(), dh)));
  const Vec2 tp(rng.uniform(desk.min.x() + 0.12, desk.max.x() - 0.12), rng.uniform(desk.min.y() + 0.12, desk.max.y() - 0.12));
  objs.push_back(make_box(kDeskTarget, Vec3(tp.x() - 0.04, tp.y() - 0.04, dh), Vec3(tp.x() + 0.04, tp.y() + 0.04, dh + 0.1)));
  rel.push_back(on("desk", kDeskTarget));

  if (mode == 3) {
    // Walls right around the desk: nothing can get close enough.
    const double g = 0.1, t = 0.1, H = 1.2;
    objs.push_back(make_box("wall_s", Vec3(desk.min.x() - g - t, desk.min.y() - g - t, 0),
                            Vec3(desk.max.x() + g + t, desk.min.y() - g, H)));
    objs.push_back(make_box("wall_n", Vec3(desk.min.x() - g - t, desk.max.y() + g, 0),
                            Vec3(desk.max.x() + g + t, desk.max.y() + g + t, H)));
    objs.push_back(make_box("wall_w", Vec3(desk.min.x() - g - t, desk.min.y() - g, 0),
                            Vec3(desk.min.x() - g, desk.max.y() + g, H)));
    objs.push_back(make_box("wall_e", Vec3(desk.max.x() + g, desk.min.y() - g, 0),
                            Vec3(desk.max.x() + g + t, desk.max.y() + g, H)));
  } else if (mode == 4) {
    // The target sits inside a closed crate.
    objs.push_back(make_box("crate", Vec3(tp.x() - 0.12, tp.y() - 0.12, dh), Vec3(tp.x() + 0.12, tp.y() + 0.12, dh + 0.25)));
    rel.push_back(on("desk", "crate"));
    rel.push_back({"crate", kDeskTarget, RelationType::in});
  }

  // Small items on the desk.
  const int on_desk = 2 + static_cast<int>(rng.index(5));
  for (int k = 0; k < on_desk; ++k) {
    const Vec2 sz(rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.2));
    const double hz = rng.uniform(0.03, 0.3);
    for (int attempt = 0; attempt < 50; ++attempt) {
      const Vec2 p(rng.uniform(desk.min.x() + sz.x() / 2, desk.max.x() - sz.x() / 2),
                   rng.uniform(desk.min.y() + sz.y() / 2, desk.max.y() - sz.y() / 2));
      const Rect2 r{p - sz / 2, p + sz / 2};
      std::vector<ObjectInstance> tops(objs.begin() + 1, objs.end());
      if ((p - tp).norm() < 0.25 || !clear_of(r, tops, 0.03)) continue;
      const std::string id = "item" + std::to_string(k);
      objs.push_back(make_box(id, Vec3(r.min.x(), r.min.y(), dh), Vec3(r.max.x(), r.max.y(), dh + hz)));
      rel.push_back(on("desk", id));
      break;
    }
  }

  // Floor clutter; the start corner stays open.
  const int clutter = static_cast<int>(rng.index(static_cast<std::size_t>(30 - objs.size()) + 1));
  for (int k = 0; k < clutter && objs.size() < 30; ++k) {
    const Vec2 sz(rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6));
    const double hz = rng.uniform(0.3, 1.2);
    for (int attempt = 0; attempt < 50; ++attempt) {
      const Vec2 p(rng.uniform(floor.min.x() + sz.x() / 2, floor.max.x() - sz.x() / 2),
                   rng.uniform(floor.min.y() + sz.y() / 2, floor.max.y() - sz.y() / 2));
      const Rect2 r{p - sz / 2, p + sz / 2};
      if ((p - start).norm() < 1.0 || !clear_of(r, objs, 0.1)) continue;
      const std::string id = "clutter" + std::to_string(k);
      objs.push_back(make_box(id, Vec3(r.min.x(), r.min.y(), 0), Vec3(r.max.x(), r.max.y(), hz)));
      break;
    }
  }
  return Scene(std::move(objs), std::move(rel), floor, start);
}

Scene kitchen_fixture() {
  std::vector<ObjectInstance> o;
  ApplianceSpec fridge;
  fridge.id = "fridge";
  fridge.x0 = 1.4;
  fridge.width = 0.5;
  fridge.depth = 0.68;
  fridge.height = 1.8;
  fridge.y_front = 5.0 - 0.02 - fridge.depth;
  fridge.hinge = HingeSide::right;
  o.push_back(make_appliance(fridge));
  o.push_back(make_box("counter_a", Vec3(1.92, 4.38, 0), Vec3(3.12, 4.98, 0.9)));
  o.push_back(make_box("counter_b", Vec3(3.12, 4.38, 0), Vec3(4.52, 4.98, 0.9)));
  o.push_back(make_box("sink_cabinet", Vec3(4.52, 4.38, 0), Vec3(5.4, 4.98, 0.9)));
  ApplianceSpec mw;
  mw.id = "microwave";
  mw.x0 = 3.5;
  mw.width = 0.45;
  mw.depth = 0.35;
  mw.height = 0.3;
  mw.z0 = 0.9;
  mw.door_thickness = 0.03;
  mw.y_front = 4.98 - mw.depth;
  mw.hinge = HingeSide::left;
  mw.handle_z = 1.05;
  o.push_back(make_appliance(mw));
  o.push_back(make_box("kettle", Vec3(2.1, 4.6, 0.9), Vec3(2.3, 4.8, 1.15)));
  o.push_back(make_box("toaster", Vec3(2.5, 4.6, 0.9), Vec3(2.8, 4.78, 1.1)));
  o.push_back(make_box("cutting_board", Vec3(4.0, 4.45, 0.9), Vec3(4.4, 4.7, 0.92)));
  o.push_back(make_box("knife_block", Vec3(4.7, 4.8, 0.9), Vec3(4.82, 4.92, 1.15)));
  o.push_back(make_box("dish_rack", Vec3(5.0, 4.5, 0.9), Vec3(5.35, 4.85, 1.05)));
  o.push_back(make_box("dining_table", Vec3(2.5, 1.6, 0), Vec3(3.7, 2.4, 0.75)));
  o.push_back(make_box("chair_n", Vec3(2.9, 2.5, 0), Vec3(3.3, 2.9, 0.9)));
  o.push_back(make_box("chair_s", Vec3(2.9, 1.1, 0), Vec3(3.3, 1.5, 0.9)));
  o.push_back(make_box("chair_e", Vec3(3.8, 1.8, 0), Vec3(4.2, 2.2, 0.9)));
  o.push_back(make_box("chair_w", Vec3(2.0, 1.8, 0), Vec3(2.4, 2.2, 0.9)));
  o.push_back(make_box("plate", Vec3(2.7, 1.9, 0.75), Vec3(2.95, 2.15, 0.77)));
  o.push_back(make_box("cup", Vec3(3.3, 2.1, 0.75), Vec3(3.38, 2.18, 0.85)));
  o.push_back(make_box("bottle", Vec3(3.45, 1.75, 0.75), Vec3(3.52, 1.82, 1.0)));
  o.push_back(make_box("fruit_bowl", Vec3(3.0, 1.7, 0.75), Vec3(3.25, 1.95, 0.85)));
  o.push_back(make_box("apple", Vec3(3.08, 1.78, 0.77), Vec3(3.16, 1.86, 0.85)));
  o.push_back(make_box("banana", Vec3(3.03, 1.88, 0.77), Vec3(3.2, 1.93, 0.81)));
  o.push_back(make_box("island", Vec3(4.6, 1.5, 0), Vec3(5.6, 2.5, 0.9)));
  o.push_back(make_box("pan", Vec3(4.8, 1.7, 0.9), Vec3(5.1, 2.0, 0.96)));
  o.push_back(make_box("pot", Vec3(5.2, 2.0, 0.9), Vec3(5.45, 2.25, 1.1)));
  o.push_back(make_box("trash_bin", Vec3(0.2, 4.6, 0), Vec3(0.5, 4.9, 0.6)));
  o.push_back(make_box("shelf", Vec3(0.02, 1.5, 0), Vec3(0.4, 2.7, 1.6)));
  o.push_back(make_box("book", Vec3(0.1, 1.8, 1.6), Vec3(0.3, 1.85, 1.85)));
  o.push_back(make_box("plant", Vec3(0.1, 0.1, 0), Vec3(0.45, 0.45, 0.8)));
  o.push_back(make_box("spice_rack", Vec3(2.9, 4.85, 0.9), Vec3(3.1, 4.97, 1.2)));
  o.push_back(make_box("mug", Vec3(4.2, 4.8, 0.9), Vec3(4.28, 4.88, 1.0)));
  std::vector<SpatialRelation> rel{
      on("counter_b", "microwave"), on("counter_a", "kettle"),      on("counter_a", "toaster"),
      on("counter_b", "cutting_board"), on("sink_cabinet", "knife_block"), on("sink_cabinet", "dish_rack"),
      on("dining_table", "plate"),  on("dining_table", "cup"),      on("dining_table", "bottle"),
      on("dining_table", "fruit_bowl"), {"fruit_bowl", "apple", RelationType::in},
      {"fruit_bowl", "banana", RelationType::in}, on("island", "pan"), on("island", "pot"),
      on("shelf", "book"),          on("counter_a", "spice_rack"), on("counter_b", "mug")};
  return Scene(std::move(o), std::move(rel), Rect2{Vec2(0, 0), Vec2(6, 5)}, Vec2(5.4, 0.5));
}

}  // namespace momapos
