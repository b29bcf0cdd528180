#include "dtg/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "dtg/error.hpp"

namespace dtg {

namespace {

struct FieldVisitor {
  virtual void field(const char* key, double& v, const char* comment) = 0;
  virtual void field(const char* key, int& v, const char* comment) = 0;
  virtual void field(const char* key, uint64_t& v, const char* comment) = 0;
  virtual void field(const char* key, std::string& v, const char* comment) = 0;
  virtual ~FieldVisitor() = default;
};

void for_each_field(Config& c, FieldVisitor& f) {
  f.field("world.resolution", c.world_resolution, "meters per cell");
  f.field("world.size_m", c.world_size_m, "world side length, >= 80");
  f.field("world.preset", c.world_preset, "open | corridor | campus");
  f.field("world.corridor_width_m", c.corridor_width_m, "minimum carved corridor width");
  f.field("world.robot_radius", c.robot_radius, "meters");

  f.field("obs.rays", c.rays, "rays per range scan");
  f.field("obs.max_range", c.max_range, "scan clip range, meters");
  f.field("obs.scan_frames", c.scan_frames, "stacked scan frames");
  f.field("obs.vel_frames", c.vel_frames, "velocity history frames (10 or 20)");
  f.field("obs.scan_period_s", c.scan_period_s, "seconds between scan frames");
  f.field("obs.vel_period_s", c.vel_period_s, "seconds between velocity frames");
  f.field("obs.cruise_speed", c.cruise_speed, "assumed speed for fabricated history");
  f.field("obs.goal_scale", c.goal_scale, "goal vector scaling before encoding");

  f.field("traj.waypoints", c.waypoints, "waypoints per trajectory (M)");
  f.field("traj.len_m", c.traj_len_m, "ground-truth trajectory arc length");

  f.field("model.scan_hidden", c.scan_hidden, "scan MLP hidden width");
  f.field("model.scan_out", c.scan_out, "scan MLP output width");
  f.field("model.vel_out", c.vel_out, "velocity MLP output width");
  f.field("model.fuse_hidden", c.fuse_hidden, "fusion MLP hidden width");
  f.field("model.cond_dim", c.cond_dim, "condition vector dimension");
  f.field("model.embed_dim", c.embed_dim, "sinusoidal step embedding dimension");
  f.field("model.f1_out", c.f1_out, "step-embedding projection width");
  f.field("model.gru_hidden", c.gru_hidden, "GRU hidden state width");
  f.field("model.crnn_passes", c.crnn_passes, "GRU sweeps over the token sequence");

  f.field("diffusion.steps", c.steps, "denoising steps (N)");
  f.field("diffusion.schedule", c.schedule, "cosine | linear");
  f.field("diffusion.sampler", c.sampler, "chained | posterior");

  f.field("train.beta", c.beta, "traversability loss weight (0 = ablation)");
  f.field("train.lr", c.lr, "Adam learning rate");
  f.field("train.batch", c.batch, "batch size");
  f.field("train.epochs", c.epochs, "training epochs");
  f.field("train.adam_beta1", c.adam_beta1, "");
  f.field("train.adam_beta2", c.adam_beta2, "");
  f.field("train.adam_eps", c.adam_eps, "");
  f.field("train.h_d", c.h_d, "gate threshold; < 0 = 0.5 x epoch-0 mean loss, frozen");
  f.field("train.gate_max_step", c.gate_max_step, "N_t, upper bound on gated steps");
  f.field("train.loss_window", c.loss_window, "per-step loss ring buffer depth");
  f.field("train.ckpt_every", c.ckpt_every, "checkpoint every E epochs (0 = final only)");
  f.field("train.seed", c.seed, "global seed; all stage randomness derives from it");

  f.field("scenario.train_dist_min", c.train_dist_min, "train travel distance > this");
  f.field("scenario.train_dist_max", c.train_dist_max, "train travel distance <= this");
  f.field("scenario.test_dist_min", c.test_dist_min, "test travel distance > this");

  f.field("sim.v_max", c.v_max, "m/s");
  f.field("sim.w_max", c.w_max, "rad/s");
  f.field("sim.accel_v", c.accel_v, "m/s^2");
  f.field("sim.accel_w", c.accel_w, "rad/s^2");
  f.field("sim.control_hz", c.control_hz, "local planner rate");
  f.field("sim.replan_hz", c.replan_hz, "trajectory generator rate");
  f.field("sim.goal_radius", c.goal_radius, "meters (protocol-fidelity value: 20)");
  f.field("sim.deadlock_s", c.deadlock_s, "stop duration counting as deadlock");
  f.field("sim.intervention_cap", c.intervention_cap, "episode aborts past this");
  f.field("sim.episode_budget_s", c.episode_budget_s, "simulated time budget");
  f.field("sim.dwa_w_heading", c.dwa_w_heading, "");
  f.field("sim.dwa_w_clearance", c.dwa_w_clearance, "");
  f.field("sim.dwa_w_velocity", c.dwa_w_velocity, "");
  f.field("sim.dwa_sim_time", c.dwa_sim_time, "arc rollout horizon, seconds");
  f.field("sim.dwa_sim_dt", c.dwa_sim_dt, "arc rollout step, seconds");
  f.field("sim.dwa_v_samples", c.dwa_v_samples, "");
  f.field("sim.dwa_w_samples", c.dwa_w_samples, "");
  f.field("sim.dwa_lookahead", c.dwa_lookahead, "target waypoint distance, meters");
  f.field("sim.dwa_clearance_cap", c.dwa_clearance_cap, "clearance score saturation, meters");
}

struct Printer : FieldVisitor {
  std::ostream& os;
  bool comments;
  explicit Printer(std::ostream& o, bool with_comments) : os(o), comments(with_comments) {}
  template <typename T>
  void emit(const char* key, const T& v, const char* comment) {
    os << key << " = " << v;
    if (comments && comment[0] != '\0') os << "   # " << comment;
    os << "\n";
  }
  void field(const char* key, double& v, const char* c) override {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    emit(key, tmp.str(), c);
  }
  void field(const char* key, int& v, const char* c) override { emit(key, v, c); }
  void field(const char* key, uint64_t& v, const char* c) override { emit(key, v, c); }
  void field(const char* key, std::string& v, const char* c) override { emit(key, v, c); }
};

struct Setter : FieldVisitor {
  const std::string& key;
  const std::string& value;
  bool done = false;
  Setter(const std::string& k, const std::string& v) : key(k), value(v) {}

  void field(const char* k, double& v, const char*) override {
    if (key != k) return;
    try {
      std::size_t pos = 0;
      v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      fail("bad-config", "cannot parse '" + value + "' for " + key);
    }
    done = true;
  }
  void field(const char* k, int& v, const char*) override {
    if (key != k) return;
    try {
      std::size_t pos = 0;
      v = std::stoi(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      fail("bad-config", "cannot parse '" + value + "' for " + key);
    }
    done = true;
  }
  void field(const char* k, uint64_t& v, const char*) override {
    if (key != k) return;
    try {
      std::size_t pos = 0;
      v = std::stoull(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      fail("bad-config", "cannot parse '" + value + "' for " + key);
    }
    done = true;
  }
  void field(const char* k, std::string& v, const char*) override {
    if (key != k) return;
    v = value;
    done = true;
  }
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Config::apply(const std::string& key, const std::string& value) {
  Setter s(key, value);
  for_each_field(*this, s);
  if (!s.done) fail("bad-config", "unknown key: " + key);
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("io", "cannot open config: " + path);
  Config c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail("bad-config", path + ":" + std::to_string(lineno) + ": expected key = value");
    c.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

void Config::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail("io", "cannot open for write: " + path);
  Printer p(os, false);
  for_each_field(const_cast<Config&>(*this), p);
}

void Config::print_defaults(std::ostream& os) const {
  Printer p(os, true);
  for_each_field(const_cast<Config&>(*this), p);
}

std::string Config::to_key_values() const {
  std::ostringstream os;
  Printer p(os, false);
  for_each_field(const_cast<Config&>(*this), p);
  return os.str();
}

void Config::validate() const {
  if (world_resolution <= 0) fail("bad-config", "world.resolution must be positive");
  if (rays < 4) fail("bad-config", "obs.rays must be >= 4");
  if (scan_frames < 1 || vel_frames < 1) fail("bad-config", "history depths must be >= 1");
  if (waypoints < 2) fail("bad-config", "traj.waypoints must be >= 2");
  if (steps < 2) fail("bad-config", "diffusion.steps must be >= 2");
  if (schedule != "cosine" && schedule != "linear")
    fail("bad-config", "diffusion.schedule must be cosine or linear");
  if (sampler != "chained" && sampler != "posterior")
    fail("bad-config", "diffusion.sampler must be chained or posterior");
  if (beta < 0) fail("bad-config", "train.beta must be >= 0");
  if (lr <= 0) fail("bad-config", "train.lr must be positive");
  if (batch < 1 || epochs < 0) fail("bad-config", "train.batch/epochs out of range");
  if (loss_window < 1) fail("bad-config", "train.loss_window must be >= 1");
  if (world_preset != "open" && world_preset != "corridor" && world_preset != "campus")
    fail("bad-config", "world.preset must be open, corridor or campus");
}

}  // namespace dtg
