#pragma once

#include <cstdint>
#include <string>

#include "momapos/scene.hpp"

namespace momapos {

/// Parameters of a fridge-like appliance whose door faces -y.
struct ApplianceSpec {
  std::string id;
  double x0 = 0.0;       // left edge of the body
  double y_front = 0.0;  // front face of the body; the door sits in front of it
  double z0 = 0.0;       // bottom of the body
  double width = 0.5;
  double depth = 0.65;
  double height = 1.8;
  double door_thickness = 0.05;
  HingeSide hinge = HingeSide::right;
  double handle_inset = 0.05;
  double handle_proud = 0.04;
  double handle_z = 1.0;
  double max_angle = 1.5707963267948966;
};

ObjectInstance make_appliance(const ApplianceSpec& spec);
ObjectInstance make_box(const std::string& id, const Vec3& min, const Vec3& max);

inline constexpr int kSuiteSize = 25;

/// Fridge against the back wall with a counter on its hinge side. A frontal
/// standoff of 0.6 m always lands inside the door sweep.
Scene fridge_fixture(int variant);
inline const std::string kFridgeTarget = "fridge";

/// Table with a few rigid objects; the target is "apple".
Scene open_table_fixture(int variant);
inline const std::string kTableTarget = "apple";

/// Randomized desk-scale scene with at most 30 objects; the target is
/// "target". Some seeds wall the target off or crowd it.
Scene desk_scene(std::uint64_t seed);
inline const std::string kDeskTarget = "target";

/// 30-object kitchen with a fridge and a microwave.
Scene kitchen_fixture();

}  // namespace momapos
