#include "dtg/worldgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtg/error.hpp"
#include "dtg/oracle.hpp"

namespace dtg {

WorldPreset preset_from_string(const std::string& s) {
  if (s == "open") return WorldPreset::open;
  if (s == "corridor") return WorldPreset::corridor;
  if (s == "campus") return WorldPreset::campus;
  fail("bad-config", "unknown world preset: " + s);
}

std::string to_string(WorldPreset p) {
  switch (p) {
    case WorldPreset::open: return "open";
    case WorldPreset::corridor: return "corridor";
    case WorldPreset::campus: return "campus";
  }
  return "?";
}

namespace {

struct GridBuilder {
  int w = 0, h = 0;
  std::vector<uint8_t> cells;  // 1 = traversable

  GridBuilder(int width, int height, uint8_t fill) : w(width), h(height) {
    cells.assign(static_cast<std::size_t>(w) * h, fill);
  }
  bool in(int x, int y) const { return x >= 0 && x < w && y >= 0 && y < h; }
  void set(int x, int y, uint8_t v) {
    if (in(x, y)) cells[static_cast<std::size_t>(y) * w + x] = v;
  }
  uint8_t get(int x, int y) const {
    return in(x, y) ? cells[static_cast<std::size_t>(y) * w + x] : 0;
  }
  void fill_rect(int x0, int y0, int x1, int y1, uint8_t v) {
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x)
        cells[static_cast<std::size_t>(y) * w + x] = v;
  }
  void fill_disc(double cx, double cy, double r, uint8_t v) {
    int x0 = static_cast<int>(std::floor(cx - r)), x1 = static_cast<int>(std::ceil(cx + r));
    int y0 = static_cast<int>(std::floor(cy - r)), y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) {
        double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) cells[static_cast<std::size_t>(y) * w + x] = v;
      }
  }

  // largest 8-connected traversable component size; optionally keep only it
  std::size_t keep_largest_component() {
    std::vector<int> label(cells.size(), -1);
    std::vector<std::size_t> sizes;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!cells[i] || label[i] >= 0) continue;
        int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        stack.push_back({x, y});
        label[i] = id;
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          ++sizes[id];
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int nx = cx + dx, ny = cy + dy;
              if (!in(nx, ny)) continue;
              std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
              if (cells[ni] && label[ni] < 0) {
                label[ni] = id;
                stack.push_back({nx, ny});
              }
            }
        }
      }
    if (sizes.empty()) return 0;
    int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i] && label[i] != best) cells[i] = 0;
    return sizes[best];
  }
};

// carve an axis-aligned corridor segment of the given half-width (cells)
void carve_segment(GridBuilder& g, int x0, int y0, int x1, int y1, int half, int margin) {
  int lox = std::min(x0, x1) - half, hix = std::max(x0, x1) + half;
  int loy = std::min(y0, y1) - half, hiy = std::max(y0, y1) + half;
  lox = std::max(lox, margin);
  loy = std::max(loy, margin);
  hix = std::min(hix, g.w - 1 - margin);
  hiy = std::min(hiy, g.h - 1 - margin);
  g.fill_rect(lox, loy, hix, hiy, 1);
}

void build_corridor(GridBuilder& g, Rng& rng, int min_width_cells) {
  const int margin = 2;
  auto rand_width_half = [&](Rng& r) {
    int wcells = static_cast<int>(r.range_int(min_width_cells, min_width_cells * 2));
    return std::max(1, wcells / 2);
  };

  // main corridor: west edge to east edge through 2-4 random turning points
  int n_turns = static_cast<int>(rng.range_int(2, 4));
  std::vector<std::pair<int, int>> pts;
  pts.push_back({margin, static_cast<int>(rng.range_int(g.h / 4, 3 * g.h / 4))});
  for (int i = 0; i < n_turns; ++i) {
    int x = margin + (g.w - 2 * margin) * (i + 1) / (n_turns + 1);
    int y = static_cast<int>(rng.range_int(g.h / 6, 5 * g.h / 6));
    pts.push_back({x, y});
  }
  pts.push_back({g.w - 1 - margin, static_cast<int>(rng.range_int(g.h / 4, 3 * g.h / 4))});

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto [x0, y0] = pts[i];
    auto [x1, y1] = pts[i + 1];
    int half = rand_width_half(rng);
    // L-shaped connection: horizontal then vertical
    carve_segment(g, x0, y0, x1, y0, half, margin);
    carve_segment(g, x1, y0, x1, y1, half, margin);
  }

  // branches off the existing network
  int n_branch = static_cast<int>(rng.range_int(3, 6));
  for (int b = 0; b < n_branch; ++b) {
    // find a random carved cell to branch from
    int x = 0, y = 0;
    bool found = false;
    for (int tries = 0; tries < 200 && !found; ++tries) {
      x = static_cast<int>(rng.range_int(margin, g.w - 1 - margin));
      y = static_cast<int>(rng.range_int(margin, g.h - 1 - margin));
      found = g.get(x, y) != 0;
    }
    if (!found) continue;
    int half = rand_width_half(rng);
    int len = static_cast<int>(rng.range_int(g.w / 6, g.w / 2));
    bool vertical = rng.uniform() < 0.5;
    int dir = rng.uniform() < 0.5 ? -1 : 1;
    if (vertical)
      carve_segment(g, x, y, x, y + dir * len, half, margin);
    else
      carve_segment(g, x, y, x + dir * len, y, half, margin);
  }
}

void build_campus(GridBuilder& g, Rng& rng, int min_gap_cells) {
  // open ground with building blocks and bush clusters; placements that
  // disconnect the map or choke it below the minimum gap are rolled back
  const int margin = 1;
  std::size_t total = g.cells.size();
  int n_blocks = static_cast<int>(rng.range_int(10, 18));
  int n_discs = static_cast<int>(rng.range_int(6, 12));

  auto try_place = [&](auto&& place) {
    std::vector<uint8_t> backup = g.cells;
    place();
    GridBuilder probe = g;
    std::size_t largest = probe.keep_largest_component();
    std::size_t traversable = 0;
    for (uint8_t c : g.cells) traversable += c ? 1 : 0;
    // reject if the placement strands any traversable cells or eats too much
    if (largest != traversable || traversable < total / 2) {
      g.cells = std::move(backup);
      return false;
    }
    g.cells = std::move(probe.cells);
    return true;
  };

  for (int i = 0; i < n_blocks; ++i) {
    int bw = static_cast<int>(rng.range_int(g.w / 20, g.w / 6));
    int bh = static_cast<int>(rng.range_int(g.h / 20, g.h / 6));
    int x0 = static_cast<int>(rng.range_int(margin + min_gap_cells, g.w - margin - min_gap_cells - bw));
    int y0 = static_cast<int>(rng.range_int(margin + min_gap_cells, g.h - margin - min_gap_cells - bh));
    try_place([&] { g.fill_rect(x0, y0, x0 + bw, y0 + bh, 0); });
  }
  for (int i = 0; i < n_discs; ++i) {
    double r = rng.uniform(g.w / 40.0, g.w / 15.0);
    double cx = rng.uniform(margin + r, g.w - margin - r);
    double cy = rng.uniform(margin + r, g.h - margin - r);
    try_place([&] { g.fill_disc(cx, cy, r, 0); });
  }
}

}  // namespace

GridWorld generate_world(uint64_t seed, const WorldSpec& spec) {
  if (spec.size_m < 80.0)
    fail("spec-infeasible", "world size must be >= 80 m per side");
  if (spec.min_corridor_width_m < 2.0 * spec.robot_radius)
    fail("spec-infeasible", "corridor width below 2x robot radius");
  if (spec.min_corridor_width_m > spec.size_m)
    fail("spec-infeasible", "corridor width exceeds world size");

  int n = static_cast<int>(std::lround(spec.size_m / spec.resolution));
  int min_width_cells =
      std::max(2, static_cast<int>(std::lround(spec.min_corridor_width_m / spec.resolution)));
  Rng rng(mix64(seed, hash_str("worldgen")));

  GridBuilder g(n, n, spec.preset == WorldPreset::corridor ? 0 : 1);
  switch (spec.preset) {
    case WorldPreset::open:
      break;  // everything traversable
    case WorldPreset::corridor:
      build_corridor(g, rng, min_width_cells);
      break;
    case WorldPreset::campus:
      build_campus(g, rng, min_width_cells);
      break;
  }
  g.keep_largest_component();

  GridWorld world(spec.resolution, n, n, std::move(g.cells));
  if (!world.connected()) fail("spec-infeasible", "generated world is not connected");
  return world;
}

std::vector<double> render_scan(const GridWorld& world, const Pose& pose, int rays,
                                double max_range) {
  if (!world.traversable_at(pose.position()))
    fail("invalid-pose", "scan pose is not on a traversable cell");
  std::vector<double> out(static_cast<std::size_t>(rays), max_range);
  double step = world.resolution() * 0.5;
  for (int r = 0; r < rays; ++r) {
    double bearing = pose.heading + 2.0 * M_PI * r / rays;
    double c = std::cos(bearing), s = std::sin(bearing);
    double range = max_range;
    for (double t = step; t <= max_range; t += step) {
      Vec2 p{pose.x + c * t, pose.y + s * t};
      if (!world.traversable_at(p)) {
        range = t;
        break;
      }
    }
    out[r] = std::min(range, max_range);
  }
  return out;
}

Scenario sample_scenario(const GridWorld& world, Rng& rng, ScenarioMode mode,
                         const Config& cfg) {
  const int w = world.width(), h = world.height();
  std::vector<std::size_t> traversable_cells;
  traversable_cells.reserve(world.traversable_count());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (world.traversable({x, y}))
        traversable_cells.push_back(static_cast<std::size_t>(y) * w + x);
  if (traversable_cells.empty()) fail("scenario-exhausted", "world has no traversable cells");

  const int kStartTries = 32;
  for (int attempt = 0; attempt < kStartTries; ++attempt) {
    std::size_t si = traversable_cells[static_cast<std::size_t>(
        rng.range_int(0, static_cast<int64_t>(traversable_cells.size()) - 1))];
    Cell start{static_cast<int>(si % w), static_cast<int>(si / w)};
    std::vector<double> dist = distance_field(world, start);

    std::vector<std::size_t> eligible;
    for (std::size_t ci : traversable_cells) {
      double d = dist[ci];
      bool ok = mode == ScenarioMode::train
                    ? (d > cfg.train_dist_min && d <= cfg.train_dist_max)
                    : (d > cfg.test_dist_min);
      if (ok) eligible.push_back(ci);
    }
    if (eligible.empty()) continue;
    std::size_t gi = eligible[static_cast<std::size_t>(
        rng.range_int(0, static_cast<int64_t>(eligible.size()) - 1))];
    Cell goal{static_cast<int>(gi % w), static_cast<int>(gi / w)};

    Scenario sc;
    Vec2 sp = world.center_of(start);
    sc.start = {sp.x, sp.y, wrap_angle(rng.uniform(-M_PI, M_PI))};
    sc.goal = world.center_of(goal);
    sc.travel_distance = dist[gi];
    return sc;
  }
  fail("scenario-exhausted",
       "no admissible start/goal pair found in " + std::to_string(kStartTries) + " tries");
}

Observation fabricate_observation(const GridWorld& world, const Pose& pose,
                                  const Vec2& goal_world, const Config& cfg) {
  Observation obs;
  obs.goal = pose.to_frame(goal_world);

  double c = std::cos(pose.heading), s = std::sin(pose.heading);
  auto back_pose = [&](double dist) {
    Pose p = pose;
    p.x -= c * dist;
    p.y -= s * dist;
    return p;
  };

  // oldest frame first; frames whose back pose is blocked reuse the current pose
  obs.scans.reserve(static_cast<std::size_t>(cfg.scan_frames) * cfg.rays);
  for (int f = cfg.scan_frames - 1; f >= 0; --f) {
    Pose p = back_pose(f * cfg.scan_period_s * cfg.cruise_speed);
    if (!world.traversable_at(p.position())) p = pose;
    std::vector<double> scan = render_scan(world, p, cfg.rays, cfg.max_range);
    obs.scans.insert(obs.scans.end(), scan.begin(), scan.end());
  }

  obs.velocities.reserve(static_cast<std::size_t>(cfg.vel_frames) * 2);
  for (int f = cfg.vel_frames - 1; f >= 0; --f) {
    double age = (f + 1) * cfg.vel_period_s;
    bool moving = world.traversable_at(back_pose(age * cfg.cruise_speed).position());
    obs.velocities.push_back(moving ? cfg.cruise_speed : 0.0);
    obs.velocities.push_back(0.0);
  }
  return obs;
}

void check_observation_dims(const Observation& obs, const Config& cfg) {
  if (obs.scans.size() != static_cast<std::size_t>(cfg.scan_input_dim()))
    fail("dim-mismatch", "scan history size " + std::to_string(obs.scans.size()) +
                             " != " + std::to_string(cfg.scan_input_dim()));
  if (obs.velocities.size() != static_cast<std::size_t>(cfg.vel_input_dim()))
    fail("dim-mismatch", "velocity history size " + std::to_string(obs.velocities.size()) +
                             " != " + std::to_string(cfg.vel_input_dim()));
  for (double v : obs.scans)
    if (!std::isfinite(v)) fail("non-finite", "scan contains a non-finite value");
  for (double v : obs.velocities)
    if (!std::isfinite(v)) fail("non-finite", "velocity contains a non-finite value");
  if (!std::isfinite(obs.goal.x) || !std::isfinite(obs.goal.y))
    fail("non-finite", "goal is not finite");
}

}  // namespace dtg
