#include "momapos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace momapos {

double Aabb::volume() const {
  const Vec3 e = (max - min).cwiseMax(0.0);
  return e.x() * e.y() * e.z();
}

bool Aabb::contains(const Vec3& p, double tol) const {
  return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
}

bool Aabb::overlaps(const Aabb& other) const {
  return (min.array() <= other.max.array()).all() && (other.min.array() <= max.array()).all();
}

void Aabb::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

std::array<Vec3, 8> Aabb::corners() const {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    out[i] = Vec3((i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(),
                  (i & 4) ? max.z() : min.z());
  }
  return out;
}

Aabb Aabb::from_points(std::span<const Vec3> points) {
  Aabb box;
  if (points.empty()) return box;
  box.min = box.max = points.front();
  for (const auto& p : points) box.expand(p);
  return box;
}

bool Rect2::contains(const Vec2& p, double tol) const {
  return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
}

bool Rect2::overlaps(const Rect2& other) const {
  return (min.array() <= other.max.array()).all() && (other.min.array() <= max.array()).all();
}

Rect2 footprint(const Aabb& box) {
  return Rect2{box.min.head<2>(), box.max.head<2>()};
}

std::array<Vec2, 4> OrientedRect::corners() const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec2 ux(c, s), uy(-s, c);
  const Vec2 ex = half_extents.x() * ux, ey = half_extents.y() * uy;
  return {center - ex - ey, center + ex - ey, center + ex + ey, center - ex + ey};
}

Rect2 OrientedRect::bounds() const {
  const auto c = corners();
  Rect2 r{c[0], c[0]};
  for (const auto& p : c) {
    r.min = r.min.cwiseMin(p);
    r.max = r.max.cwiseMax(p);
  }
  return r;
}

bool overlaps(const OrientedRect& rect, const Rect2& box) {
  // World axes.
  if (!rect.bounds().overlaps(box)) return false;

  // Rectangle's own axes.
  const double c = std::cos(rect.yaw), s = std::sin(rect.yaw);
  const std::array<Vec2, 2> axes{Vec2(c, s), Vec2(-s, c)};
  const std::array<Vec2, 4> box_corners{box.min, Vec2(box.max.x(), box.min.y()), box.max,
                                        Vec2(box.min.x(), box.max.y())};
  for (int k = 0; k < 2; ++k) {
    const double center_proj = axes[k].dot(rect.center);
    const double half = rect.half_extents[k];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : box_corners) {
      const double d = axes[k].dot(p);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (hi < center_proj - half || lo > center_proj + half) return false;
  }
  return true;
}

double dist_xy(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x() - b.x(), a.y() - b.y());
}

double dist_xy(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

double distance_to_rect(const Vec2& p, const Rect2& box) {
  const Vec2 clamped = p.cwiseMax(box.min).cwiseMin(box.max);
  return (p - clamped).norm();
}

bool segment_intersects(const Vec3& p, const Vec3& q, const Aabb& box) {
  const Vec3 d = q - p;
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (p[k] < box.min[k] || p[k] > box.max[k]) return false;
      continue;
    }
    const double inv = 1.0 / d[k];
    double ta = (box.min[k] - p[k]) * inv;
    double tb = (box.max[k] - p[k]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

Vec3 rotate_about(const Vec3& point, const Vec3& pivot, const Vec3& axis, double angle) {
  return pivot + Eigen::AngleAxisd(angle, axis) * (point - pivot);
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

}  // namespace momapos
