#pragma once

#include <optional>
#include <vector>

#include "dtg/grid_world.hpp"
#include "dtg/trajectory.hpp"

namespace dtg {

// Path length on the 8-connected grid is a + b*sqrt(2) cell steps. Keeping the
// integer step counts (instead of an accumulated float) makes lengths from any
// search algorithm bit-identical: a given (a, b) pair has exactly one value,
// and sqrt(2) being irrational means distinct pairs never collide.
struct StepCost {
  int straight = 0;
  int diagonal = 0;

  double value() const;               // in cell units
  double meters(double resolution) const { return value() * resolution; }
};

struct PathResult {
  std::vector<Cell> cells;  // from -> to inclusive
  StepCost cost;
  double length_m = 0.0;  // octile-weighted meters
};

// Optimal 8-connected path under octile costs (1 orthogonal, sqrt(2) diagonal).
PathResult shortest_path(const GridWorld& world, const Cell& from, const Cell& to);

// A* length only; endpoints off-grid or on obstacles snap to the nearest
// traversable cell within 1 m, otherwise "unreachable"/"bad-endpoint" errors.
double travel_distance(const GridWorld& world, const Vec2& point, const Vec2& goal);

// Single-source octile distance field (meters) to every traversable cell;
// non-traversable / unreachable cells hold +inf. Used by scenario sampling.
std::vector<double> distance_field(const GridWorld& world, const Cell& source);

// A* path from `start` toward `goal`, truncated at `truncate_len` meters of
// arc length, resampled to `waypoint_count` evenly spaced waypoints in the
// robot frame of `start`, and differenced into increments.
Trajectory ground_truth_trajectory(const GridWorld& world, const Pose& start,
                                   const Vec2& goal, int waypoint_count = 16,
                                   double truncate_len = 15.0);

}  // namespace dtg
