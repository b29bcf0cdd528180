#pragma once

#include <string>
#include <vector>

#include "dtg/config.hpp"
#include "dtg/diffusion.hpp"
#include "dtg/grid_world.hpp"
#include "dtg/tensor.hpp"

namespace dtg {

struct RobotState {
  Pose pose;
  double v = 0.0;  // m/s, clamped to [0, v_max]
  double w = 0.0;  // rad/s, clamped to [-w_max, w_max]
};

struct Command {
  double v = 0.0;
  double w = 0.0;
  bool feasible = true;  // false when every candidate arc collides
};

// Dynamic-window search over (v, w) within one control period's acceleration
// bounds. Arcs are rolled out for dwa_sim_time and scored by
// w1*heading-to-target + w2*clearance + w3*velocity; colliding arcs are
// discarded. Ties break toward the lexicographically smallest (v, w).
Command local_plan(const RobotState& state, const std::vector<Vec2>& waypoints_world,
                   const std::vector<Vec2>& obstacle_points, const Config& cfg);

// Exact unicycle integration (arc when w != 0), velocity limits enforced.
RobotState step_kinematics(const RobotState& state, double v_cmd, double w_cmd,
                           double dt, const Config& cfg);

struct EpisodeResult {
  bool reached = false;
  double travel_distance = 0.0;
  int interventions = 0;
  int steps = 0;
};

// Per-step trace sink for offline rendering; null disables tracing.
struct TraceSink {
  virtual void step(int step, const RobotState& state) = 0;
  virtual void plan(int step, const std::vector<Vec2>& waypoints_world) = 0;
  virtual ~TraceSink() = default;
};

// Closed loop: the generator replans at replan_hz from the live observation
// while local_plan runs at control_hz. Interventions (entering non-traversable
// terrain, or standing still past deadlock_s) relocate the robot to the
// nearest traversable cell center and count; the episode ends on the goal
// radius, the step budget, or the intervention cap.
EpisodeResult run_episode(const GridWorld& world, const ParamStore& params,
                          const DiffusionSchedule& sched, const Config& cfg,
                          const Pose& start, const Vec2& goal, uint64_t seed,
                          TraceSink* trace = nullptr);

}  // namespace dtg
