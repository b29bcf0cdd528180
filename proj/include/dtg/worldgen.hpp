#pragma once

#include <string>
#include <vector>

#include "dtg/config.hpp"
#include "dtg/grid_world.hpp"
#include "dtg/rng.hpp"

namespace dtg {

enum class WorldPreset { open, corridor, campus };

WorldPreset preset_from_string(const std::string& s);
std::string to_string(WorldPreset p);

struct WorldSpec {
  double size_m = 120.0;
  WorldPreset preset = WorldPreset::campus;
  double min_corridor_width_m = 3.0;
  double resolution = 0.25;
  double robot_radius = 0.5;

  static WorldSpec from_config(const Config& c) {
    return {c.world_size_m, preset_from_string(c.world_preset), c.corridor_width_m,
            c.world_resolution, c.robot_radius};
  }
};

// Deterministic for a fixed (seed, spec); the result is always connected.
GridWorld generate_world(uint64_t seed, const WorldSpec& spec);

// Range scan: ray r leaves at bearing heading + 2*pi*r/R; range is the march
// distance to the first non-traversable cell (off-grid counts), clipped to
// max_range. March step is resolution/2.
std::vector<double> render_scan(const GridWorld& world, const Pose& pose, int rays,
                                double max_range);

enum class ScenarioMode { train, test };

struct Scenario {
  Pose start;
  Vec2 goal;
  double travel_distance = 0.0;  // octile A* meters, start cell -> goal cell
};

// Start/goal on traversable, A*-reachable cells with the mode's distance band
// (train: (min, max], test: > test_min). Throws "scenario-exhausted" when no
// admissible pair exists after bounded retries.
Scenario sample_scenario(const GridWorld& world, Rng& rng, ScenarioMode mode,
                         const Config& cfg);

struct Observation {
  std::vector<double> scans;       // scan_frames * rays, oldest frame first
  std::vector<double> velocities;  // vel_frames * 2, oldest first: (linear, angular)
  Vec2 goal;                       // robot frame, meters
};

// Observation for a robot standing at `pose` that approached it at cruise
// speed along its heading: older scans come from poses stepped back along
// -heading (falling back to `pose` where that walks into an obstacle).
Observation fabricate_observation(const GridWorld& world, const Pose& pose,
                                  const Vec2& goal_world, const Config& cfg);

void check_observation_dims(const Observation& obs, const Config& cfg);

}  // namespace dtg
