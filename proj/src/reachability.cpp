#include "momapos/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"

namespace momapos {

namespace {

constexpr char kMagic[4] = {'I', 'R', 'M', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr unsigned kShards = 64;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    uint(bits);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <typename T>
  T uint() {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw FormatError("IRM file truncated");
      v |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  double f64() {
    const auto bits = uint<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

std::optional<std::array<std::uint32_t, 3>> ReachabilityMap::voxel_of(const Vec3& local) const {
  std::array<std::uint32_t, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const double rel = (local[k] - extent.min[k]) / voxel_size;
    if (!(rel >= 0.0) || rel >= static_cast<double>(dims[k])) return std::nullopt;
    out[k] = static_cast<std::uint32_t>(rel);
  }
  return out;
}

Vec3 ReachabilityMap::voxel_center(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
  return extent.min + voxel_size * Vec3(ix + 0.5, iy + 0.5, iz + 0.5);
}

Aabb ReachabilityMap::voxel_box(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
  const Vec3 lo = extent.min + voxel_size * Vec3(ix, iy, iz);
  return Aabb{lo, lo + Vec3::Constant(voxel_size)};
}

std::uint32_t ReachabilityMap::count_at(const Vec3& local) const {
  const auto v = voxel_of(local);
  return v ? counts[index((*v)[0], (*v)[1], (*v)[2])] : 0;
}

double ReachabilityMap::score_local(const Vec3& local) const {
  if (max_count == 0) return 0.0;
  return static_cast<double>(count_at(local)) / max_count;
}

std::size_t ReachabilityMap::nonzero_voxels() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

ReachabilityMap build_irm(const RobotModel& robot, std::size_t samples, double voxel_size,
                          std::uint64_t seed, unsigned threads) {
  if (samples < 1) throw std::invalid_argument("IRM needs at least one sample");
  if (!(voxel_size > 0.0)) throw std::invalid_argument("voxel size must be positive");

  ReachabilityMap map;
  map.voxel_size = voxel_size;
  map.robot_name = robot.name();
  map.build_seed = seed;
  const double half = robot.reach();
  const auto n = static_cast<std::uint32_t>(std::max(1.0, std::ceil(2.0 * half / voxel_size - 1e-9)));
  map.dims = {n, n, n};
  map.extent.min = Vec3::Constant(-half);
  map.extent.max = map.extent.min + Vec3::Constant(n * voxel_size);
  map.counts.assign(static_cast<std::size_t>(n) * n * n, 0);

  const JointVector lo = robot.lower_limits(), hi = robot.upper_limits();
  auto run_shard = [&](unsigned shard, std::vector<std::uint32_t>& counts) {
    const std::size_t begin = samples * shard / kShards;
    const std::size_t end = samples * (shard + 1) / kShards;
    Rng rng(derive_seed(seed, {shard}));
    JointVector q(robot.dof());
    for (std::size_t s = begin; s < end; ++s) {
      for (int i = 0; i < robot.dof(); ++i) q[i] = rng.uniform(lo[i], hi[i]);
      const auto v = map.voxel_of(end_effector_position(robot, q));
      if (v) ++counts[map.index((*v)[0], (*v)[1], (*v)[2])];
    }
  };

  threads = std::clamp(threads, 1u, kShards);
  if (threads == 1) {
    for (unsigned s = 0; s < kShards; ++s) run_shard(s, map.counts);
  } else {
    std::vector<std::vector<std::uint32_t>> partial(threads, std::vector<std::uint32_t>(map.counts.size(), 0));
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (unsigned s = t; s < kShards; s += threads) run_shard(s, partial[t]);
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& p : partial) {
      for (std::size_t i = 0; i < p.size(); ++i) map.counts[i] += p[i];
    }
  }
  map.max_count = *std::max_element(map.counts.begin(), map.counts.end());
  return map;
}

double irm_query(const ReachabilityMap& map, const BasePose& base, double base_z_offset,
                 const Vec3& target) {
  const Vec3 rel(target.x() - base.xy.x(), target.y() - base.xy.y(), target.z() - base_z_offset);
  const double c = std::cos(base.yaw), s = std::sin(base.yaw);
  const Vec3 local(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(), rel.z());
  return map.score_local(local);
}

void save_irm(const ReachabilityMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  Writer w(out);
  out.write(kMagic, 4);
  w.uint(kVersion);
  w.f64(map.voxel_size);
  for (int k = 0; k < 3; ++k) w.f64(map.extent.min[k]);
  for (int k = 0; k < 3; ++k) w.f64(map.extent.max[k]);
  for (auto d : map.dims) w.uint(d);
  w.uint(map.build_seed);
  w.uint(static_cast<std::uint32_t>(map.robot_name.size()));
  out.write(map.robot_name.data(), static_cast<std::streamsize>(map.robot_name.size()));
  for (auto c : map.counts) w.uint(c);
  if (!out) throw IoError("failed writing " + path.string());
}

ReachabilityMap load_irm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad IRM magic");
  Reader r(in);
  if (r.uint<std::uint16_t>() != kVersion) throw FormatError("unsupported IRM version");

  ReachabilityMap map;
  map.voxel_size = r.f64();
  for (int k = 0; k < 3; ++k) map.extent.min[k] = r.f64();
  for (int k = 0; k < 3; ++k) map.extent.max[k] = r.f64();
  for (auto& d : map.dims) d = r.uint<std::uint32_t>();
  map.build_seed = r.uint<std::uint64_t>();
  const auto name_len = r.uint<std::uint32_t>();
  if (name_len > (1u << 16)) throw FormatError("IRM robot name too long");
  map.robot_name.resize(name_len);
  in.read(map.robot_name.data(), name_len);
  if (static_cast<std::uint32_t>(in.gcount()) != name_len) throw FormatError("IRM file truncated");

  if (!(map.voxel_size > 0.0) || !map.extent.valid()) throw FormatError("bad IRM geometry");
  const double volume = static_cast<double>(map.dims[0]) * map.dims[1] * map.dims[2];
  if (volume <= 0.0 || volume > 1e9) throw FormatError("bad IRM dims");
  for (int k = 0; k < 3; ++k) {
    const double expect = map.extent.min[k] + map.dims[k] * map.voxel_size;
    if (std::abs(expect - map.extent.max[k]) > 1e-6 * std::max(1.0, std::abs(expect))) {
      throw FormatError("IRM dims disagree with extent");
    }
  }
  map.counts.resize(static_cast<std::size_t>(volume));
  for (auto& c : map.counts) c = r.uint<std::uint32_t>();
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in IRM file");
  map.max_count = map.counts.empty() ? 0 : *std::max_element(map.counts.begin(), map.counts.end());
  return map;
}

void export_irm_csv(const ReachabilityMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x,y,z,count,score\n";
  for (std::uint32_t i = 0; i < map.dims[0]; ++i) {
    for (std::uint32_t j = 0; j < map.dims[1]; ++j) {
      for (std::uint32_t k = 0; k < map.dims[2]; ++k) {
        const auto c = map.counts[map.index(i, j, k)];
        if (c == 0) continue;
        const Vec3 p = map.voxel_center(i, j, k);
        out << p.x() << ',' << p.y() << ',' << p.z() << ',' << c << ','
            << static_cast<double>(c) / map.max_count << '\n';
      }
    }
  }
}

}  // namespace momapos
