#pragma once

#include <array>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace momapos {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Axis-aligned box, closed on all faces.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool valid() const { return (min.array() <= max.array()).all(); }
  double volume() const;
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extents() const { return max - min; }
  bool contains(const Vec3& p, double tol = 0.0) const;
  bool overlaps(const Aabb& other) const;
  void expand(const Vec3& p);
  std::array<Vec3, 8> corners() const;

  static Aabb from_points(std::span<const Vec3> points);
  bool operator==(const Aabb&) const = default;
};

/// Axis-aligned rectangle in the floor plane.
struct Rect2 {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  bool valid() const { return (min.array() <= max.array()).all(); }
  bool contains(const Vec2& p, double tol = 0.0) const;
  bool overlaps(const Rect2& other) const;
  Vec2 center() const { return 0.5 * (min + max); }
  bool operator==(const Rect2&) const = default;
};

Rect2 footprint(const Aabb& box);

/// Rectangle rotated by `yaw` about its center; models the base footprint.
struct OrientedRect {
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Zero();
  double yaw = 0.0;

  std::array<Vec2, 4> corners() const;
  Rect2 bounds() const;
};

/// Separating-axis test; touching counts as overlap.
bool overlaps(const OrientedRect& rect, const Rect2& box);

double dist_xy(const Vec3& a, const Vec3& b);
double dist_xy(const Vec2& a, const Vec2& b);

/// Euclidean distance from p to the closest point of box (0 inside).
double distance_to_rect(const Vec2& p, const Rect2& box);

/// Slab test for the closed segment p->q against a closed box.
bool segment_intersects(const Vec3& p, const Vec3& q, const Aabb& box);

/// Rotates `point` by `angle` (right-handed) about the line through `pivot`
/// along unit `axis`.
Vec3 rotate_about(const Vec3& point, const Vec3& pivot, const Vec3& axis, double angle);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace momapos
