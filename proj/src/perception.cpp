#include "dtg/perception.hpp"

#include <cmath>

#include "dtg/error.hpp"

namespace dtg {

namespace {
Tensor init_linear(std::size_t out, std::size_t in, Rng& rng) {
  Tensor w = Tensor::zeros({out, in});
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : w.data) x = rng.uniform(-bound, bound);
  return w;
}
}  // namespace

void init_perception_params(ParamStore& params, const Config& cfg, Rng& rng) {
  Rng r = rng.child("perception");
  auto lin = [&](const std::string& name, std::size_t out, std::size_t in) {
    params.add(name + ".w", init_linear(out, in, r));
    params.add(name + ".b", Tensor::zeros({out}));
  };
  lin("perception/scan0", cfg.scan_hidden, static_cast<std::size_t>(cfg.scan_input_dim()));
  lin("perception/scan1", cfg.scan_out, cfg.scan_hidden);
  lin("perception/vel0", cfg.vel_out, static_cast<std::size_t>(cfg.vel_input_dim()));
  lin("perception/fuse0", cfg.fuse_hidden,
      static_cast<std::size_t>(cfg.scan_out + cfg.vel_out + 2));
  lin("perception/fuse1", cfg.cond_dim, cfg.fuse_hidden);
}

Val encode(Tape& tape, const Observation& obs, const BoundParams& p, const Config& cfg) {
  check_observation_dims(obs, cfg);

  std::vector<double> scans(obs.scans.size());
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (obs.scans[i] < 0.0 || obs.scans[i] > cfg.max_range)
      fail("bad-observation", "scan range outside [0, max_range]");
    scans[i] = obs.scans[i] / cfg.max_range;
  }
  Val scan_in = tape.leaf(scans);
  Val vel_in = tape.leaf(obs.velocities);
  Val goal_in = tape.leaf({obs.goal.x * cfg.goal_scale, obs.goal.y * cfg.goal_scale});

  auto layer = [&](const std::string& name, Val x) {
    return tape.tanh_(tape.add(tape.matvec(p[name + ".w"], x), p[name + ".b"]));
  };
  Val s = layer("perception/scan1", layer("perception/scan0", scan_in));
  Val v = layer("perception/vel0", vel_in);
  Val fused = tape.concat(tape.concat(s, v), goal_in);
  return layer("perception/fuse1", layer("perception/fuse0", fused));
}

Tensor encode_value(const Observation& obs, const ParamStore& params, const Config& cfg) {
  Tape tape(false);
  BoundParams bound(tape, params);
  Val c = encode(tape, obs, bound, cfg);
  return tape.value(c);
}

}  // namespace dtg
