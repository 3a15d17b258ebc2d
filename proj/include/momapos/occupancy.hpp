#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "momapos/geometry.hpp"
#include "momapos/scene.hpp"

namespace momapos {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// 2D occupancy over the floor. Cell (i, j) covers
/// [origin + (i, j) * resolution, origin + (i + 1, j + 1) * resolution).
class OccupancyGrid {
 public:
  OccupancyGrid(Vec2 origin, double resolution, int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < nx_ && c.y < ny_; }
  bool occupied(Cell c) const { return cells_[index(c)] != 0; }
  void set_occupied(Cell c, bool value) { cells_[index(c)] = value ? 1 : 0; }
  Vec2 center(Cell c) const;
  std::optional<Cell> cell_at(const Vec2& p) const;
  std::size_t count_occupied() const;

  /// Cells reachable from `from` through 8-connected free cells.
  std::vector<std::uint8_t> reachable_from(Cell from) const;
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * nx_ + c.x; }

  void write_pgm(const std::filesystem::path& path) const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  Vec2 origin_;
  double resolution_;
  int nx_;
  int ny_;
  std::vector<std::uint8_t> cells_;
};

/// Radius of the orientation-free disc that contains the base footprint.
double footprint_radius(const Aabb& robot_footprint);

/// Marks every cell whose footprint disc touches an obstacle footprint.
/// Articulated objects in `subset` contribute their swept boxes.
OccupancyGrid build_occupancy(const Scene& scene, const ObjectSet& subset, double resolution,
                              const Aabb& robot_footprint,
                              int sweep_samples = kDefaultSweepSamples);

/// Same rasterization over an explicit list of floor rectangles.
OccupancyGrid rasterize_footprints(const Rect2& floor, std::span<const Rect2> obstacles,
                                   double resolution, double radius);

}  // namespace momapos
