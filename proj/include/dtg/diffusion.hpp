#pragma once

#include <string>
#include <vector>

#include "dtg/config.hpp"
#include "dtg/rng.hpp"
#include "dtg/tensor.hpp"
#include "dtg/trajectory.hpp"

namespace dtg {

// Noise schedule over steps 1..N. alpha_bar[0] = 1 by convention so the
// posterior sampler can index t-1 uniformly. Construction enforces the type
// invariants (strictly decreasing alpha_bar and SNR, alpha_bar_1 > 0.95,
// alpha_bar_N < 0.01) and rejects (N, kind) pairs that violate them.
struct DiffusionSchedule {
  int steps = 0;
  std::string kind;
  std::vector<double> alpha;      // index 1..N
  std::vector<double> alpha_bar;  // index 0..N
  std::vector<double> snr;        // index 1..N

  static DiffusionSchedule make(int n, const std::string& kind);
};

// Closed-form forward noising x~_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
Trajectory noise_trajectory(const Trajectory& x0, int t,
                            const std::vector<Vec2>& epsilon,
                            const DiffusionSchedule& sched);

std::vector<double> sinusoidal_embedding(double t, int dim);

void init_crnn_params(ParamStore& params, const Config& cfg, Rng& rng);

// One denoiser evaluation: hidden state from (step embedding, condition), a
// GRU sweep over the M noisy increment tokens, shared linear readout to the
// predicted clean increments ((M,2), x0-prediction).
Val crnn_denoise(Tape& tape, Val noisy, int t, Val cond, const BoundParams& p,
                 const Config& cfg);

// Non-tape convenience that evaluates the denoiser on plain tensors.
Tensor crnn_denoise_value(const Tensor& noisy, int t, const Tensor& cond,
                          const ParamStore& params, const Config& cfg);

enum class SamplerMode { chained, posterior };
SamplerMode sampler_from_string(const std::string& s);

// Turns Gaussian noise into a trajectory under condition c.
// chained: x <- R(x, t, c) for t = N..1 (no re-noising between steps).
// posterior: x0-prediction ancestral sampling with schedule-scaled noise.
Trajectory sample_trajectory(const Tensor& cond, const ParamStore& params,
                             const DiffusionSchedule& sched, const Config& cfg,
                             Rng& rng, SamplerMode mode);

}  // namespace dtg
