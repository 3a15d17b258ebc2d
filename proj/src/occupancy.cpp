#include "momapos/occupancy.hpp"

#include <cmath>
#include <deque>
#include <fstream>

#include "momapos/errors.hpp"

namespace momapos {

OccupancyGrid::OccupancyGrid(Vec2 origin, double resolution, int nx, int ny)
    : origin_(origin), resolution_(resolution), nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) throw ResolutionTooCoarse("occupancy grid needs at least 2x2 cells");
  cells_.assign(static_cast<std::size_t>(nx) * ny, 0);
}

Vec2 OccupancyGrid::center(Cell c) const {
  return origin_ + resolution_ * Vec2(c.x + 0.5, c.y + 0.5);
}

std::optional<Cell> OccupancyGrid::cell_at(const Vec2& p) const {
  const Vec2 rel = (p - origin_) / resolution_;
  const Cell c{static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y()))};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

std::size_t OccupancyGrid::count_occupied() const {
  std::size_t n = 0;
  for (auto v : cells_) n += v != 0;
  return n;
}

std::vector<std::uint8_t> OccupancyGrid::reachable_from(Cell from) const {
  std::vector<std::uint8_t> seen(cells_.size(), 0);
  if (!in_bounds(from) || occupied(from)) return seen;
  std::deque<Cell> queue{from};
  seen[index(from)] = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Cell n{c.x + dx, c.y + dy};
        if ((dx == 0 && dy == 0) || !in_bounds(n) || occupied(n) || seen[index(n)]) continue;
        seen[index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return seen;
}

void OccupancyGrid::write_pgm(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n# resolution " << resolution_ << " origin " << origin_.x() << ' ' << origin_.y()
      << "\n" << nx_ << ' ' << ny_ << "\n255\n";
  // Top image row is the max-y edge of the floor.
  for (int y = ny_ - 1; y >= 0; --y) {
    for (int x = 0; x < nx_; ++x) out.put(occupied({x, y}) ? char(0) : char(255));
  }
}

void OccupancyGrid::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x,y,occupied\n";
  for (int y = 0; y < ny_; ++y) {
    for (int x = 0; x < nx_; ++x) {
      const Vec2 c = center({x, y});
      out << c.x() << ',' << c.y() << ',' << (occupied({x, y}) ? 1 : 0) << '\n';
    }
  }
}

double footprint_radius(const Aabb& robot_footprint) {
  const Vec3 e = robot_footprint.extents();
  return 0.5 * std::hypot(e.x(), e.y());
}

OccupancyGrid rasterize_footprints(const Rect2& floor, std::span<const Rect2> obstacles,
                                   double resolution, double radius) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  const Vec2 size = floor.max - floor.min;
  OccupancyGrid grid(floor.min, resolution, static_cast<int>(std::floor(size.x() / resolution + 1e-9)),
                     static_cast<int>(std::floor(size.y() / resolution + 1e-9)));
  for (const Rect2& r : obstacles) {
    const Vec2 lo = (r.min - Vec2::Constant(radius) - floor.min) / resolution;
    const Vec2 hi = (r.max + Vec2::Constant(radius) - floor.min) / resolution;
    const int x0 = std::max(0, static_cast<int>(std::floor(lo.x())) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(lo.y())) - 1);
    const int x1 = std::min(grid.nx() - 1, static_cast<int>(std::ceil(hi.x())) + 1);
    const int y1 = std::min(grid.ny() - 1, static_cast<int>(std::ceil(hi.y())) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (distance_to_rect(grid.center({x, y}), r) <= radius) grid.set_occupied({x, y}, true);
      }
    }
  }
  return grid;
}

OccupancyGrid build_occupancy(const Scene& scene, const ObjectSet& subset, double resolution,
                              const Aabb& robot_footprint, int sweep_samples) {
  std::vector<Rect2> rects;
  for (const auto& o : scene.objects()) {
    if (!subset.count(o.id)) continue;
    rects.push_back(footprint(o.bbox));
    if (o.articulated()) {
      for (const auto& b : swept_obstacles(o, sweep_samples)) rects.push_back(footprint(b));
    }
  }
  return rasterize_footprints(scene.floor(), rects, resolution, footprint_radius(robot_footprint));
}

}  // namespace momapos
