#include "dtg/navsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "dtg/error.hpp"
#include "dtg/perception.hpp"
#include "dtg/worldgen.hpp"

namespace dtg {

namespace {

Pose integrate(const Pose& p, double v, double w, double dt) {
  Pose out = p;
  if (std::abs(w) < 1e-9) {
    out.x += v * std::cos(p.heading) * dt;
    out.y += v * std::sin(p.heading) * dt;
  } else {
    double th1 = p.heading + w * dt;
    out.x += v / w * (std::sin(th1) - std::sin(p.heading));
    out.y -= v / w * (std::cos(th1) - std::cos(p.heading));
    out.heading = th1;
  }
  out.heading = wrap_angle(out.heading);
  return out;
}

double min_dist_to_points(const Vec2& p, const std::vector<Vec2>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& q : pts) {
    double d = (q - p).norm();
    if (d < best) best = d;
  }
  return best;
}

}  // namespace

RobotState step_kinematics(const RobotState& state, double v_cmd, double w_cmd,
                           double dt, const Config& cfg) {
  if (dt <= 0.0) fail("bad-input", "dt must be positive");
  RobotState out = state;
  out.v = std::clamp(v_cmd, 0.0, cfg.v_max);
  out.w = std::clamp(w_cmd, -cfg.w_max, cfg.w_max);
  out.pose = integrate(state.pose, out.v, out.w, dt);
  return out;
}

Command local_plan(const RobotState& state, const std::vector<Vec2>& waypoints_world,
                   const std::vector<Vec2>& obstacle_points, const Config& cfg) {
  if (waypoints_world.empty()) fail("bad-input", "local planner needs a waypoint");

  // target: first waypoint beyond the lookahead radius, else the last one
  Vec2 target = waypoints_world.back();
  for (const Vec2& w : waypoints_world) {
    if ((w - state.pose.position()).norm() >= cfg.dwa_lookahead) {
      target = w;
      break;
    }
  }

  double dt_ctl = 1.0 / cfg.control_hz;
  double v_lo = std::clamp(state.v - cfg.accel_v * dt_ctl, 0.0, cfg.v_max);
  double v_hi = std::clamp(state.v + cfg.accel_v * dt_ctl, 0.0, cfg.v_max);
  double w_lo = std::clamp(state.w - cfg.accel_w * dt_ctl, -cfg.w_max, cfg.w_max);
  double w_hi = std::clamp(state.w + cfg.accel_w * dt_ctl, -cfg.w_max, cfg.w_max);

  int nv = std::max(2, cfg.dwa_v_samples);
  int nw = std::max(3, cfg.dwa_w_samples);

  Command best;
  best.feasible = false;
  double best_score = -std::numeric_limits<double>::infinity();

  for (int iv = 0; iv < nv; ++iv) {
    double v = v_lo + (v_hi - v_lo) * iv / (nv - 1);
    for (int iw = 0; iw < nw; ++iw) {
      double w = w_lo + (w_hi - w_lo) * iw / (nw - 1);

      // roll out the candidate arc
      Pose p = state.pose;
      bool collides = false;
      double min_clear = std::numeric_limits<double>::infinity();
      int steps = static_cast<int>(std::ceil(cfg.dwa_sim_time / cfg.dwa_sim_dt));
      for (int s = 0; s < steps; ++s) {
        p = integrate(p, v, w, cfg.dwa_sim_dt);
        double d = min_dist_to_points(p.position(), obstacle_points);
        min_clear = std::min(min_clear, d);
        if (d < cfg.robot_radius) {
          collides = true;
          break;
        }
      }
      if (collides) continue;

      Vec2 to_target = target - p.position();
      double bearing = std::atan2(to_target.y, to_target.x);
      double heading_err = std::abs(wrap_angle(bearing - p.heading));
      double heading_score = 1.0 - heading_err / M_PI;
      double clear_score =
          std::min(min_clear, cfg.dwa_clearance_cap) / cfg.dwa_clearance_cap;
      double vel_score = v / cfg.v_max;
      double score = cfg.dwa_w_heading * heading_score +
                     cfg.dwa_w_clearance * clear_score + cfg.dwa_w_velocity * vel_score;

      bool better = !best.feasible || score > best_score ||
                    (score == best_score &&
                     (v < best.v || (v == best.v && w < best.w)));
      if (better) {
        best_score = score;
        best.v = v;
        best.w = w;
        best.feasible = true;
      }
    }
  }

  if (!best.feasible) return Command{0.0, 0.0, false};
  return best;
}

namespace {

// live history rings feeding the observation during an episode
struct History {
  std::deque<Pose> scan_poses;      // newest at back
  std::deque<Vec2> velocities;      // (v, w), newest at back

  void seed(const GridWorld& world, const Pose& start, const Config& cfg) {
    Observation fab = fabricate_observation(world, start, {0.0, 0.0}, cfg);
    // rebuild the fabricated poses the same way fabricate_observation does
    double c = std::cos(start.heading), s = std::sin(start.heading);
    scan_poses.clear();
    for (int f = cfg.scan_frames - 1; f >= 0; --f) {
      Pose p = start;
      p.x -= c * f * cfg.scan_period_s * cfg.cruise_speed;
      p.y -= s * f * cfg.scan_period_s * cfg.cruise_speed;
      if (!world.traversable_at(p.position())) p = start;
      scan_poses.push_back(p);
    }
    velocities.clear();
    for (std::size_t i = 0; i < fab.velocities.size(); i += 2)
      velocities.push_back({fab.velocities[i], fab.velocities[i + 1]});
  }

  Observation observe(const GridWorld& world, const Pose& now, const Vec2& goal,
                      const Config& cfg) const {
    Observation obs;
    obs.goal = now.to_frame(goal);
    for (const Pose& p : scan_poses) {
      std::vector<double> scan = render_scan(world, p, cfg.rays, cfg.max_range);
      obs.scans.insert(obs.scans.end(), scan.begin(), scan.end());
    }
    for (const Vec2& v : velocities) {
      obs.velocities.push_back(v.x);
      obs.velocities.push_back(v.y);
    }
    return obs;
  }
};

}  // namespace

EpisodeResult run_episode(const GridWorld& world, const ParamStore& params,
                          const DiffusionSchedule& sched, const Config& cfg,
                          const Pose& start, const Vec2& goal, uint64_t seed,
                          TraceSink* trace) {
  if (!world.traversable_at(start.position()))
    fail("invalid-pose", "episode start is not traversable");

  EpisodeResult result;
  RobotState state{start, 0.0, 0.0};
  History hist;
  hist.seed(world, start, cfg);

  Rng rng(mix64(seed, hash_str("episode")));
  SamplerMode mode = sampler_from_string(cfg.sampler);

  double dt = 1.0 / cfg.control_hz;
  int budget = static_cast<int>(cfg.episode_budget_s * cfg.control_hz);
  int replan_every = std::max(1, static_cast<int>(std::lround(cfg.control_hz / cfg.replan_hz)));
  int scan_every = std::max(1, static_cast<int>(std::lround(cfg.scan_period_s * cfg.control_hz)));
  int vel_every = std::max(1, static_cast<int>(std::lround(cfg.vel_period_s * cfg.control_hz)));

  std::vector<Vec2> plan_world;
  std::vector<Vec2> obstacle_points;
  double stopped_time = 0.0;

  for (int step = 0; step < budget; ++step) {
    if ((goal - state.pose.position()).norm() <= cfg.goal_radius) {
      result.reached = true;
      break;
    }

    if (step % replan_every == 0) {
      Observation obs = hist.observe(world, state.pose, goal, cfg);
      Tensor cond = encode_value(obs, params, cfg);
      Trajectory traj = sample_trajectory(cond, params, sched, cfg, rng, mode);
      plan_world.clear();
      for (const Vec2& wp : traj.waypoints())
        plan_world.push_back(state.pose.to_world(wp));
      // obstacle points from the newest scan frame
      obstacle_points.clear();
      const Pose& sp = hist.scan_poses.back();
      std::size_t newest = obs.scans.size() - cfg.rays;
      for (int r = 0; r < cfg.rays; ++r) {
        double range = obs.scans[newest + r];
        if (range >= cfg.max_range) continue;
        double bearing = sp.heading + 2.0 * M_PI * r / cfg.rays;
        obstacle_points.push_back(
            {sp.x + std::cos(bearing) * range, sp.y + std::sin(bearing) * range});
      }
      if (trace) trace->plan(step, plan_world);
    }

    Command cmd = local_plan(state, plan_world, obstacle_points, cfg);
    state = step_kinematics(state, cmd.v, cmd.w, dt, cfg);
    result.travel_distance += std::abs(state.v) * dt;
    ++result.steps;
    if (trace) trace->step(step, state);

    if ((step + 1) % scan_every == 0) {
      Pose p = state.pose;
      if (!world.traversable_at(p.position())) p = hist.scan_poses.back();
      hist.scan_poses.push_back(p);
      hist.scan_poses.pop_front();
    }
    if ((step + 1) % vel_every == 0) {
      hist.velocities.push_back({state.v, state.w});
      hist.velocities.pop_front();
    }

    stopped_time = std::abs(state.v) < 0.01 ? stopped_time + dt : 0.0;

    bool off_road = !world.traversable_at(state.pose.position());
    bool deadlocked = stopped_time > cfg.deadlock_s;
    if (off_road || deadlocked) {
      ++result.interventions;
      auto [ok, cell] = world.nearest_traversable(state.pose.position(), 5.0);
      if (!ok) break;
      Vec2 center = world.center_of(cell);
      state.pose.x = center.x;
      state.pose.y = center.y;
      state.v = 0.0;
      state.w = 0.0;
      stopped_time = 0.0;
      if (deadlocked) {
        // face the goal so replanning sees a fresh geometry
        Vec2 to_goal = goal - state.pose.position();
        state.pose.heading = wrap_angle(std::atan2(to_goal.y, to_goal.x));
      }
      if (result.interventions >= cfg.intervention_cap) break;
    }
  }

  if (!result.reached && (goal - state.pose.position()).norm() <= cfg.goal_radius)
    result.reached = true;
  return result;
}

}  // namespace dtg
