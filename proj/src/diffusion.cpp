#include "dtg/diffusion.hpp"

#include <cmath>

#include "dtg/error.hpp"

namespace dtg {

DiffusionSchedule DiffusionSchedule::make(int n, const std::string& kind) {
  if (n < 2) fail("bad-schedule", "need at least 2 steps");
  DiffusionSchedule s;
  s.steps = n;
  s.kind = kind;
  s.alpha.assign(n + 1, 0.0);
  s.alpha_bar.assign(n + 1, 0.0);
  s.snr.assign(n + 1, 0.0);
  s.alpha_bar[0] = 1.0;

  if (kind == "cosine") {
    // squared-cosine cumulative schedule with per-step retention floored at
    // 1e-3 so alpha stays strictly positive
    const double offs = 0.008;
    auto f = [&](double t) {
      double v = std::cos((t / n + offs) / (1.0 + offs) * M_PI / 2.0);
      return v * v;
    };
    double f0 = f(0.0);
    for (int t = 1; t <= n; ++t) {
      double abar_t = f(t) / f0;
      double abar_prev = s.alpha_bar[t - 1];
      double a = std::clamp(abar_t / abar_prev, 1e-3, 0.999999);
      s.alpha[t] = a;
      s.alpha_bar[t] = abar_prev * a;
    }
  } else if (kind == "linear") {
    // betas linear in [0.08/N, min(0.999, 20/N)]; endpoints scale with N so
    // the endpoint invariants hold for every N >= 2
    double beta_lo = 0.08 / n;
    double beta_hi = std::min(0.999, 20.0 / n);
    for (int t = 1; t <= n; ++t) {
      double beta = beta_lo + (beta_hi - beta_lo) * (t - 1) / (n - 1);
      s.alpha[t] = 1.0 - beta;
      s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
    }
  } else {
    fail("bad-schedule", "unknown schedule kind: " + kind);
  }

  for (int t = 1; t <= n; ++t) s.snr[t] = s.alpha_bar[t] / (1.0 - s.alpha_bar[t]);

  for (int t = 1; t <= n; ++t) {
    if (!(s.alpha_bar[t] < s.alpha_bar[t - 1]))
      fail("bad-schedule", "alpha_bar not strictly decreasing at t=" + std::to_string(t));
    if (t >= 2 && !(s.snr[t] < s.snr[t - 1]))
      fail("bad-schedule", "SNR not strictly decreasing at t=" + std::to_string(t));
  }
  if (!(s.alpha_bar[1] > 0.95))
    fail("bad-schedule", kind + " schedule with N=" + std::to_string(n) +
                             " leaves alpha_bar_1 <= 0.95");
  if (!(s.alpha_bar[n] < 0.01))
    fail("bad-schedule", kind + " schedule with N=" + std::to_string(n) +
                             " leaves alpha_bar_N >= 0.01");
  return s;
}

Trajectory noise_trajectory(const Trajectory& x0, int t,
                            const std::vector<Vec2>& epsilon,
                            const DiffusionSchedule& sched) {
  if (t < 1 || t > sched.steps) fail("bad-step", "t out of [1, N]");
  if (epsilon.size() != x0.increments.size())
    fail("shape-mismatch", "epsilon size != trajectory size");
  double a = std::sqrt(sched.alpha_bar[t]);
  double b = std::sqrt(1.0 - sched.alpha_bar[t]);
  Trajectory out;
  out.increments.resize(x0.increments.size());
  for (std::size_t i = 0; i < x0.increments.size(); ++i) {
    out.increments[i].x = a * x0.increments[i].x + b * epsilon[i].x;
    out.increments[i].y = a * x0.increments[i].y + b * epsilon[i].y;
  }
  return out;
}

std::vector<double> sinusoidal_embedding(double t, int dim) {
  if (dim < 2 || dim % 2 != 0) fail("bad-config", "embedding dim must be even and >= 2");
  std::vector<double> pe(static_cast<std::size_t>(dim));
  int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    double freq = std::pow(10000.0, -static_cast<double>(i) / half);
    pe[2 * i] = std::sin(t * freq);
    pe[2 * i + 1] = std::cos(t * freq);
  }
  return pe;
}

namespace {
Tensor init_linear(std::size_t out, std::size_t in, Rng& rng) {
  Tensor w = Tensor::zeros({out, in});
  double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : w.data) x = rng.uniform(-bound, bound);
  return w;
}
}  // namespace

void init_crnn_params(ParamStore& params, const Config& cfg, Rng& rng) {
  Rng r = rng.child("crnn");
  std::size_t h = static_cast<std::size_t>(cfg.gru_hidden);
  auto lin = [&](const std::string& name, std::size_t out, std::size_t in) {
    params.add(name + ".w", init_linear(out, in, r));
    params.add(name + ".b", Tensor::zeros({out}));
  };
  lin("crnn/f1", static_cast<std::size_t>(cfg.f1_out), static_cast<std::size_t>(cfg.embed_dim));
  lin("crnn/f2", h, static_cast<std::size_t>(cfg.f1_out + cfg.cond_dim));
  // GRU gates: z (update), r (reset), n (candidate, with separate hidden bias)
  for (const char* gate : {"z", "r", "n"}) {
    params.add(std::string("crnn/gru.w") + gate, init_linear(h, 2, r));
    params.add(std::string("crnn/gru.u") + gate, init_linear(h, h, r));
    params.add(std::string("crnn/gru.b") + gate, Tensor::zeros({h}));
  }
  params.add("crnn/gru.bnh", Tensor::zeros({h}));
  lin("crnn/out", 2, h);
}

Val crnn_denoise(Tape& tape, Val noisy, int t, Val cond, const BoundParams& p,
                 const Config& cfg) {
  const Tensor& x = tape.value(noisy);
  if (x.rank() != 2 || x.shape[0] != static_cast<std::size_t>(cfg.waypoints) ||
      x.shape[1] != 2)
    fail("shape-mismatch", "denoiser expects (M,2) increments");
  if (tape.value(cond).size() != static_cast<std::size_t>(cfg.cond_dim))
    fail("shape-mismatch", "condition dimension differs from checkpoint config");

  Val pe = tape.leaf(sinusoidal_embedding(static_cast<double>(t), cfg.embed_dim));
  Val f1 = tape.tanh_(tape.add(tape.matvec(p["crnn/f1.w"], pe), p["crnn/f1.b"]));
  Val h = tape.tanh_(tape.add(
      tape.matvec(p["crnn/f2.w"], tape.concat(f1, cond)), p["crnn/f2.b"]));

  const int m = cfg.waypoints;
  std::vector<Val> token_h(static_cast<std::size_t>(m));
  for (int pass = 0; pass < std::max(1, cfg.crnn_passes); ++pass) {
    for (int i = 0; i < m; ++i) {
      Val xi = tape.slice(noisy, static_cast<std::size_t>(2 * i), 2);
      Val z = tape.sigmoid_(tape.add(
          tape.add(tape.matvec(p["crnn/gru.wz"], xi), tape.matvec(p["crnn/gru.uz"], h)),
          p["crnn/gru.bz"]));
      Val rg = tape.sigmoid_(tape.add(
          tape.add(tape.matvec(p["crnn/gru.wr"], xi), tape.matvec(p["crnn/gru.ur"], h)),
          p["crnn/gru.br"]));
      Val cand = tape.tanh_(tape.add(
          tape.add(tape.matvec(p["crnn/gru.wn"], xi), p["crnn/gru.bn"]),
          tape.mul(rg, tape.add(tape.matvec(p["crnn/gru.un"], h), p["crnn/gru.bnh"]))));
      // h' = (1 - z) * cand + z * h
      Val one_minus_z = tape.add_const(tape.scale(z, -1.0), 1.0);
      h = tape.add(tape.mul(one_minus_z, cand), tape.mul(z, h));
      token_h[static_cast<std::size_t>(i)] = h;
    }
  }

  Val out = Val{};
  for (int i = 0; i < m; ++i) {
    Val yi = tape.add(tape.matvec(p["crnn/out.w"], token_h[static_cast<std::size_t>(i)]),
                      p["crnn/out.b"]);
    out = out.valid() ? tape.concat(out, yi) : yi;
  }
  return tape.reshape(out, {static_cast<std::size_t>(m), 2});
}

Tensor crnn_denoise_value(const Tensor& noisy, int t, const Tensor& cond,
                          const ParamStore& params, const Config& cfg) {
  Tape tape(false);
  BoundParams bound(tape, params);
  Val out = crnn_denoise(tape, tape.leaf(noisy), t, tape.leaf(cond), bound, cfg);
  return tape.value(out);
}

SamplerMode sampler_from_string(const std::string& s) {
  if (s == "chained") return SamplerMode::chained;
  if (s == "posterior") return SamplerMode::posterior;
  fail("bad-config", "unknown sampler mode: " + s);
}

Trajectory sample_trajectory(const Tensor& cond, const ParamStore& params,
                             const DiffusionSchedule& sched, const Config& cfg,
                             Rng& rng, SamplerMode mode) {
  const int m = cfg.waypoints;
  Tensor x = Tensor::zeros({static_cast<std::size_t>(m), 2});
  for (double& v : x.data) v = rng.normal();

  for (int t = sched.steps; t >= 1; --t) {
    Tensor x0_hat = crnn_denoise_value(x, t, cond, params, cfg);
    if (mode == SamplerMode::chained || t == 1) {
      x = std::move(x0_hat);
    } else {
      // posterior mean for x_{t-1} given (x_t, x0_hat), plus scaled noise
      double abar_t = sched.alpha_bar[t];
      double abar_prev = sched.alpha_bar[t - 1];
      double beta_t = 1.0 - sched.alpha[t];
      double c0 = std::sqrt(abar_prev) * beta_t / (1.0 - abar_t);
      double ct = std::sqrt(sched.alpha[t]) * (1.0 - abar_prev) / (1.0 - abar_t);
      double var = (1.0 - abar_prev) / (1.0 - abar_t) * beta_t;
      double sigma = std::sqrt(std::max(0.0, var));
      for (std::size_t i = 0; i < x.data.size(); ++i)
        x.data[i] = c0 * x0_hat.data[i] + ct * x.data[i] + sigma * rng.normal();
    }
  }

  Trajectory out;
  out.increments.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    out.increments[static_cast<std::size_t>(i)] = {x.data[2 * i], x.data[2 * i + 1]};
  return out;
}

}  // namespace dtg
