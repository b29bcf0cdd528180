#pragma once

#include <string>
#include <vector>

#include "dtg/config.hpp"
#include "dtg/grid_world.hpp"
#include "dtg/trajectory.hpp"
#include "dtg/worldgen.hpp"

namespace dtg {

// One scenario: where the robot stands, what it sees, and the resampled
// shortest-path prefix it should imitate (robot-frame increments).
struct ScenarioRecord {
  uint32_t world_index = 0;
  Pose start;
  Vec2 goal;          // world frame
  Observation obs;    // includes the robot-frame goal
  Trajectory gt;      // M increments
  double travel_distance = 0.0;  // A* meters at build time
};

// Self-contained scenario container ("DTGD"): the worlds the records refer to
// are embedded so training and evaluation need no side files.
struct Dataset {
  std::vector<GridWorld> worlds;
  std::vector<std::string> world_names;
  std::vector<ScenarioRecord> records;
  // observation geometry captured at build time
  int rays = 0;
  int scan_frames = 0;
  int vel_frames = 0;
  double max_range = 0.0;
  int waypoints = 0;
  std::string mode;  // "train" | "test"

  void save(const std::string& path) const;
  static Dataset load(const std::string& path);
  void check_compatible(const Config& cfg) const;
};

// Samples `count` scenarios round-robin across the worlds and builds their
// observations and ground-truth trajectories.
Dataset build_dataset(std::vector<GridWorld> worlds, std::vector<std::string> names,
                      int count, ScenarioMode mode, const Config& cfg, uint64_t seed);

}  // namespace dtg
