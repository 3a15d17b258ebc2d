#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "momapos/geometry.hpp"
#include "momapos/kinematics.hpp"

namespace momapos {

/// Voxelized count of forward-kinematics hits around the arm base. Read as an
/// inverse map: a target at offset v from the arm base is reachable with score
/// count(v) / max_count.
struct ReachabilityMap {
  double voxel_size = 0.05;
  Aabb extent;
  std::array<std::uint32_t, 3> dims{0, 0, 0};
  std::vector<std::uint32_t> counts;
  std::uint32_t max_count = 0;
  std::string robot_name;
  std::uint64_t build_seed = 0;

  std::size_t index(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
    return (static_cast<std::size_t>(ix) * dims[1] + iy) * dims[2] + iz;
  }
  std::optional<std::array<std::uint32_t, 3>> voxel_of(const Vec3& local) const;
  Vec3 voxel_center(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const;
  Aabb voxel_box(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const;
  std::uint32_t count_at(const Vec3& local) const;
  /// count / max_count for a point in the arm-base frame; 0 outside the extent.
  double score_local(const Vec3& local) const;
  std::size_t nonzero_voxels() const;

  bool operator==(const ReachabilityMap&) const = default;
};

inline constexpr std::size_t kDefaultIrmSamples = 2'000'000;
inline constexpr double kDefaultVoxelSize = 0.05;

/// Samples uniform in-limit joint vectors and bins their end-effector
/// positions. Work is split into fixed seeded shards, so the result does not
/// depend on `threads`.
ReachabilityMap build_irm(const RobotModel& robot, std::size_t samples, double voxel_size,
                          std::uint64_t seed, unsigned threads = 1);

/// Score of reaching world point `target` from a base at `base` whose arm
/// base sits `base_z_offset` (r^z + r^h) above the floor.
double irm_query(const ReachabilityMap& map, const BasePose& base, double base_z_offset,
                 const Vec3& target);

void save_irm(const ReachabilityMap& map, const std::filesystem::path& path);
ReachabilityMap load_irm(const std::filesystem::path& path);
void export_irm_csv(const ReachabilityMap& map, const std::filesystem::path& path);

}  // namespace momapos
