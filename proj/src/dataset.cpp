#include "dtg/dataset.hpp"

#include <cstring>
#include <fstream>

#include "dtg/error.hpp"
#include "dtg/oracle.hpp"
#include "dtg/rng.hpp"

namespace dtg {

namespace {
constexpr char kMagic[4] = {'D', 'T', 'G', 'D'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail("corrupt-file", "truncated dataset");
  return v;
}

void write_str(std::ostream& os, const std::string& s) {
  write_pod(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is) {
  uint32_t len = read_pod<uint32_t>(is);
  if (len > (1u << 20)) fail("corrupt-file", "implausible string length");
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) fail("corrupt-file", "truncated string");
  return s;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
  write_pod(os, static_cast<uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& is) {
  uint64_t n = read_pod<uint64_t>(is);
  if (n > (1ull << 28)) fail("corrupt-file", "implausible array length");
  std::vector<double> v(static_cast<std::size_t>(n));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) fail("corrupt-file", "truncated array");
  return v;
}
}  // namespace

void Dataset::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail("io", "cannot open for write: " + path);
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_str(os, mode);
  write_pod(os, static_cast<uint32_t>(rays));
  write_pod(os, static_cast<uint32_t>(scan_frames));
  write_pod(os, static_cast<uint32_t>(vel_frames));
  write_pod(os, max_range);
  write_pod(os, static_cast<uint32_t>(waypoints));

  write_pod(os, static_cast<uint32_t>(worlds.size()));
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    write_str(os, world_names[i]);
    const GridWorld& w = worlds[i];
    write_pod(os, w.resolution());
    write_pod(os, static_cast<uint32_t>(w.width()));
    write_pod(os, static_cast<uint32_t>(w.height()));
    const auto& grid = w.traversable_grid();
    std::vector<uint8_t> packed((grid.size() + 7) / 8, 0);
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (grid[j]) packed[j / 8] |= static_cast<uint8_t>(1u << (j % 8));
    os.write(reinterpret_cast<const char*>(packed.data()),
             static_cast<std::streamsize>(packed.size()));
  }

  write_pod(os, static_cast<uint32_t>(records.size()));
  for (const ScenarioRecord& r : records) {
    write_pod(os, r.world_index);
    write_pod(os, r.start.x);
    write_pod(os, r.start.y);
    write_pod(os, r.start.heading);
    write_pod(os, r.goal.x);
    write_pod(os, r.goal.y);
    write_pod(os, r.travel_distance);
    write_doubles(os, r.obs.scans);
    write_doubles(os, r.obs.velocities);
    write_pod(os, r.obs.goal.x);
    write_pod(os, r.obs.goal.y);
    std::vector<double> inc(r.gt.increments.size() * 2);
    for (std::size_t i = 0; i < r.gt.increments.size(); ++i) {
      inc[2 * i] = r.gt.increments[i].x;
      inc[2 * i + 1] = r.gt.increments[i].y;
    }
    write_doubles(os, inc);
  }
  if (!os) fail("io", "write failed: " + path);
}

Dataset Dataset::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("io", "cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    fail("bad-magic", "not a dataset file: " + path);
  uint32_t version = read_pod<uint32_t>(is);
  if (version != kVersion)
    fail("version-mismatch", "dataset version " + std::to_string(version));

  Dataset d;
  d.mode = read_str(is);
  d.rays = static_cast<int>(read_pod<uint32_t>(is));
  d.scan_frames = static_cast<int>(read_pod<uint32_t>(is));
  d.vel_frames = static_cast<int>(read_pod<uint32_t>(is));
  d.max_range = read_pod<double>(is);
  d.waypoints = static_cast<int>(read_pod<uint32_t>(is));

  uint32_t n_worlds = read_pod<uint32_t>(is);
  for (uint32_t i = 0; i < n_worlds; ++i) {
    d.world_names.push_back(read_str(is));
    double res = read_pod<double>(is);
    uint32_t w = read_pod<uint32_t>(is);
    uint32_t h = read_pod<uint32_t>(is);
    std::size_t cells = static_cast<std::size_t>(w) * h;
    std::vector<uint8_t> packed((cells + 7) / 8);
    is.read(reinterpret_cast<char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
    if (!is) fail("corrupt-file", "truncated world grid");
    std::vector<uint8_t> grid(cells);
    for (std::size_t j = 0; j < cells; ++j) grid[j] = (packed[j / 8] >> (j % 8)) & 1u;
    d.worlds.emplace_back(res, static_cast<int>(w), static_cast<int>(h), std::move(grid));
  }

  uint32_t n_records = read_pod<uint32_t>(is);
  for (uint32_t i = 0; i < n_records; ++i) {
    ScenarioRecord r;
    r.world_index = read_pod<uint32_t>(is);
    if (r.world_index >= d.worlds.size()) fail("corrupt-file", "world index out of range");
    r.start.x = read_pod<double>(is);
    r.start.y = read_pod<double>(is);
    r.start.heading = read_pod<double>(is);
    r.goal.x = read_pod<double>(is);
    r.goal.y = read_pod<double>(is);
    r.travel_distance = read_pod<double>(is);
    r.obs.scans = read_doubles(is);
    r.obs.velocities = read_doubles(is);
    r.obs.goal.x = read_pod<double>(is);
    r.obs.goal.y = read_pod<double>(is);
    std::vector<double> inc = read_doubles(is);
    r.gt.increments.resize(inc.size() / 2);
    for (std::size_t j = 0; j < r.gt.increments.size(); ++j)
      r.gt.increments[j] = {inc[2 * j], inc[2 * j + 1]};
    d.records.push_back(std::move(r));
  }
  return d;
}

void Dataset::check_compatible(const Config& cfg) const {
  if (rays != cfg.rays || scan_frames != cfg.scan_frames || vel_frames != cfg.vel_frames)
    fail("dim-mismatch", "dataset observation geometry differs from config");
  if (waypoints != cfg.waypoints)
    fail("dim-mismatch", "dataset waypoint count differs from config");
}

Dataset build_dataset(std::vector<GridWorld> worlds, std::vector<std::string> names,
                      int count, ScenarioMode mode, const Config& cfg, uint64_t seed) {
  if (worlds.empty()) fail("bad-input", "no worlds given");
  if (names.size() != worlds.size()) fail("bad-input", "world name count mismatch");

  Dataset d;
  d.mode = mode == ScenarioMode::train ? "train" : "test";
  d.rays = cfg.rays;
  d.scan_frames = cfg.scan_frames;
  d.vel_frames = cfg.vel_frames;
  d.max_range = cfg.max_range;
  d.waypoints = cfg.waypoints;
  d.worlds = std::move(worlds);
  d.world_names = std::move(names);

  Rng root(mix64(seed, hash_str("dataset")));
  for (int i = 0; i < count; ++i) {
    uint32_t wi = static_cast<uint32_t>(i % d.worlds.size());
    const GridWorld& world = d.worlds[wi];
    Rng rng = root.child("scenario", static_cast<uint64_t>(i));

    // a scenario whose truncated A* prefix cannot be built is resampled
    ScenarioRecord rec;
    bool ok = false;
    for (int tries = 0; tries < 16 && !ok; ++tries) {
      Scenario sc = sample_scenario(world, rng, mode, cfg);
      try {
        rec.gt = ground_truth_trajectory(world, sc.start, sc.goal, cfg.waypoints,
                                         cfg.traj_len_m);
      } catch (const Error&) {
        continue;
      }
      rec.world_index = wi;
      rec.start = sc.start;
      rec.goal = sc.goal;
      rec.travel_distance = sc.travel_distance;
      rec.obs = fabricate_observation(world, sc.start, sc.goal, cfg);
      ok = true;
    }
    if (!ok) fail("scenario-exhausted", "could not build a valid record");
    d.records.push_back(std::move(rec));
  }
  return d;
}

}  // namespace dtg
