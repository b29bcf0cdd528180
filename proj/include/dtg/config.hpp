#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dtg {

// Every tunable in one place. Values here are the documented defaults; a
// plain-text key=value file can override any of them (see load/save).
struct Config {
  // world generation
  double world_resolution = 0.25;      // meters per cell
  double world_size_m = 120.0;         // side length
  std::string world_preset = "campus"; // open | corridor | campus
  double corridor_width_m = 3.0;       // min carved corridor width
  double robot_radius = 0.5;

  // observation
  int rays = 64;                 // rays per scan
  double max_range = 20.0;       // meters
  int scan_frames = 3;           // stacked scans, oldest -> newest
  int vel_frames = 10;           // velocity history frames (10 or 20 supported)
  double scan_period_s = 0.3;    // spacing between scan frames
  double vel_period_s = 0.1;     // spacing between velocity frames
  double cruise_speed = 1.0;     // assumed approach speed for fabricated history
  double goal_scale = 1.0 / 60.0;

  // trajectory
  int waypoints = 16;        // M
  double traj_len_m = 15.0;  // ground-truth arc length

  // model dimensions
  int scan_hidden = 512;
  int scan_out = 256;
  int vel_out = 64;
  int fuse_hidden = 256;
  int cond_dim = 256;   // D_c
  int embed_dim = 64;   // sinusoidal step embedding
  int f1_out = 64;
  int gru_hidden = 256;
  int crnn_passes = 1;  // full sweeps of the GRU over the token sequence

  // diffusion
  int steps = 32;                   // N
  std::string schedule = "cosine";  // cosine | linear
  std::string sampler = "chained";  // chained | posterior

  // training
  double beta = 0.1;  // traversability loss weight; 0 disables the branch
  double lr = 1e-3;
  int batch = 16;
  int epochs = 30;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double h_d = -1.0;      // gating threshold; < 0 = auto (0.5 x epoch-0 mean loss)
  int gate_max_step = 10; // N_t: only steps below this can be gated in
  int loss_window = 5;    // ring buffer depth per step
  int ckpt_every = 0;     // also save every E epochs (0 = final only)
  uint64_t seed = 42;

  // scenario sampling
  double train_dist_min = 15.0;
  double train_dist_max = 60.0;
  double test_dist_min = 50.0;

  // closed-loop simulation
  double v_max = 1.0;
  double w_max = 1.0;
  double accel_v = 2.0;
  double accel_w = 4.0;
  double control_hz = 20.0;
  double replan_hz = 5.0;
  double goal_radius = 2.0;
  double deadlock_s = 3.0;
  int intervention_cap = 10;
  double episode_budget_s = 180.0;
  double dwa_w_heading = 0.8;
  double dwa_w_clearance = 0.2;
  double dwa_w_velocity = 0.1;
  double dwa_sim_time = 1.0;
  double dwa_sim_dt = 0.1;
  int dwa_v_samples = 5;
  int dwa_w_samples = 11;
  double dwa_lookahead = 1.5;
  double dwa_clearance_cap = 2.0;

  int scan_input_dim() const { return scan_frames * rays; }
  int vel_input_dim() const { return vel_frames * 2; }

  // throws on unknown key or malformed line
  static Config load(const std::string& path);
  void apply(const std::string& key, const std::string& value);
  void save(const std::string& path) const;
  void print_defaults(std::ostream& os) const;  // annotated key = value dump
  std::string to_key_values() const;
  void validate() const;
};

}  // namespace dtg
