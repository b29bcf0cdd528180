#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dtg/grid_world.hpp"
#include "dtg/trajectory.hpp"

namespace dtg {

// True iff every waypoint lies on a traversable cell; off-grid waypoints count
// as non-traversable.
bool binary_traversability(const GridWorld& world, const std::vector<Vec2>& waypoints);

// Exact distance from a point to the nearest non-traversable cell center,
// clipped to `clip` meters; 0 when the point is off-grid.
double point_clearance(const GridWorld& world, const Vec2& p, double clip);

// Mean waypoint clearance clipped at the robot radius (0.5 m), normalized to
// [0, 1] for reporting.
double clearance_traversability(const GridWorld& world, const std::vector<Vec2>& waypoints,
                                double robot_radius = 0.5);

struct DistanceRatioResult {
  double signed_ratio = 0.0;  // (h_c - h_t + |tau|) / (2 |tau|), clamped to [0,1]
  double literal = 0.0;       // 1 - |h_t - h_c| / (2 |tau|)
  double h_c = 0.0;
  double h_t = 0.0;
  double traj_len = 0.0;      // |tau| = sum of increment norms
  bool excluded = false;      // h_t not computable after endpoint snapping
  bool clamped = false;       // signed form left [0,1] before clamping
};

// Both distance-ratio variants from two travel-distance queries. `trajectory`
// is in the robot frame of `start`; h_c uses the robot position, h_t the last
// waypoint in world frame.
DistanceRatioResult distance_ratio(const GridWorld& world, const Trajectory& trajectory,
                                   const Pose& start, const Vec2& goal);

struct EvalRecord {
  int scenario_id = 0;
  bool binary_traversable = false;
  double clearance_score = 0.0;
  double distance_ratio_signed = 0.0;
  double distance_ratio_literal = 0.0;
  double inference_time_s = 0.0;
  bool excluded = false;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev (n-1), 0 for a single record
  int count = 0;
};

struct Summary {
  MetricStats binary;          // fraction of fully traversable trajectories
  MetricStats clearance;
  MetricStats ratio_signed;    // over non-excluded records
  MetricStats ratio_literal;
  MetricStats inference_time;
  int excluded_count = 0;
  int total = 0;
};

Summary aggregate(const std::vector<EvalRecord>& records);

void write_eval_csv(const std::string& path, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_eval_csv(const std::string& path);
void print_summary_table(std::ostream& os, const std::vector<std::string>& names,
                         const std::vector<Summary>& summaries);

}  // namespace dtg
