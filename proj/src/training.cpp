#include "dtg/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dtg/checkpoint.hpp"
#include "dtg/error.hpp"
#include "dtg/perception.hpp"
#include "dtg/rng.hpp"

namespace dtg {

Val diffusion_loss(Tape& tape, Val predicted, Val target_leaf) {
  return tape.mse(predicted, target_leaf);
}

double diffusion_loss_value(const Tensor& predicted, const Trajectory& gt) {
  if (predicted.size() != gt.increments.size() * 2)
    fail("shape-mismatch", "prediction size != 2M");
  double s = 0.0;
  for (std::size_t i = 0; i < gt.increments.size(); ++i) {
    double dx = predicted.data[2 * i] - gt.increments[i].x;
    double dy = predicted.data[2 * i + 1] - gt.increments[i].y;
    s += dx * dx + dy * dy;
  }
  return s / (2.0 * gt.increments.size());
}

Val traversability_loss(Tape& tape, Val predicted_increments, const Pose& start,
                        const GridWorld& world) {
  Val wps = tape.cumsum0(predicted_increments);
  // robot frame -> world frame: p_w = p_r . R^T + t
  double c = std::cos(start.heading), s = std::sin(start.heading);
  Val rot_t = tape.leaf(Tensor::from_matrix(2, 2, {c, s, -s, c}));
  Val trans = tape.leaf({start.x, start.y});
  Val world_wps = tape.add_rowvec(tape.matmul(wps, rot_t), trans);
  Val clear = tape.clip01(tape.bilinear_sample(world.clearance_field_ref(), world_wps));
  return tape.exp_(tape.add_const(tape.scale(tape.mean(clear), -1.0), 1.0));
}

AdaptiveState::AdaptiveState(int n, int gate_max_step, int loss_window, double threshold)
    : n_steps(n), gate_max(gate_max_step), window(loss_window), h_d(threshold) {
  history.resize(static_cast<std::size_t>(n));
}

double AdaptiveState::mean_recent(int step) const {
  if (step < 0 || step >= n_steps) return std::numeric_limits<double>::infinity();
  const auto& h = history[static_cast<std::size_t>(step)];
  if (static_cast<int>(h.size()) < window)
    return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (auto it = h.end() - window; it != h.end(); ++it) s += *it;
  return s / window;
}

bool adaptive_update(AdaptiveState& state, int epoch, int t, double loss_d) {
  if (t < 0 || t >= state.n_steps) fail("bad-step", "adaptive step out of [0, N-1]");
  auto& hist = state.history[static_cast<std::size_t>(t)];
  hist.push_back(loss_d);
  while (static_cast<int>(hist.size()) > state.window) hist.pop_front();

  // grow the gate buffer: step t-1 joins once its recent mean clears the
  // threshold (t - 1 ranges over [0, gate_max - 1])
  if (epoch >= 1 && t >= 1 && t - 1 < state.gate_max && state.h_d >= 0.0 &&
      state.mean_recent(t - 1) < state.h_d) {
    state.buffer.insert(t - 1);  // idempotent
  }
  return !state.buffer.empty() && state.buffer.count(t) > 0;
}

AdamState::AdamState(const ParamStore& params) {
  m.reserve(params.items().size());
  v.reserve(params.items().size());
  for (const auto& item : params.items()) {
    m.push_back(Tensor::zeros(item.value.shape));
    v.push_back(Tensor::zeros(item.value.shape));
  }
}

void AdamState::update(ParamStore& params, const std::vector<const Tensor*>& grads,
                       const Config& cfg) {
  ++step;
  double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
  double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
  auto& items = params.items();
  for (std::size_t p = 0; p < items.size(); ++p) {
    double* w = items[p].value.data.data();
    const double* g = grads[p]->data.data();
    double* mp = m[p].data.data();
    double* vp = v[p].data.data();
    std::size_t n = items[p].value.size();
    for (std::size_t i = 0; i < n; ++i) {
      mp[i] = b1 * mp[i] + (1.0 - b1) * g[i];
      vp[i] = b2 * vp[i] + (1.0 - b2) * g[i] * g[i];
      double mhat = mp[i] / corr1;
      double vhat = vp[i] / corr2;
      w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

void init_model_params(ParamStore& params, const Config& cfg, uint64_t seed) {
  Rng rng(mix64(seed, hash_str("model-init")));
  init_perception_params(params, cfg, rng);
  init_crnn_params(params, cfg, rng);
}

StepLosses train_step(const std::vector<const ScenarioRecord*>& batch,
                      const Dataset& data, ParamStore& params, AdamState& opt,
                      const DiffusionSchedule& sched, AdaptiveState& state,
                      const Config& cfg, int epoch, int64_t step_index) {
  if (batch.empty()) fail("bad-input", "empty batch");

  Tape tape;
  BoundParams bound(tape, params);

  StepLosses out;
  Val total{};
  for (std::size_t bi = 0; bi < batch.size(); ++bi) {
    const ScenarioRecord& rec = *batch[bi];
    Rng item_rng(mix64(cfg.seed, static_cast<uint64_t>(step_index), bi));

    int ts = static_cast<int>(item_rng.range_int(0, sched.steps - 1));  // 0-based
    std::vector<Vec2> eps(rec.gt.increments.size());
    for (Vec2& e : eps) {
      e.x = item_rng.normal();
      e.y = item_rng.normal();
    }
    Trajectory noisy = noise_trajectory(rec.gt, ts + 1, eps, sched);

    std::vector<double> noisy_flat(noisy.increments.size() * 2);
    std::vector<double> gt_flat(rec.gt.increments.size() * 2);
    for (std::size_t i = 0; i < noisy.increments.size(); ++i) {
      noisy_flat[2 * i] = noisy.increments[i].x;
      noisy_flat[2 * i + 1] = noisy.increments[i].y;
      gt_flat[2 * i] = rec.gt.increments[i].x;
      gt_flat[2 * i + 1] = rec.gt.increments[i].y;
    }
    Val noisy_leaf = tape.reshape(tape.leaf(noisy_flat), {noisy.increments.size(), 2});
    Val gt_leaf = tape.reshape(tape.leaf(gt_flat), {rec.gt.increments.size(), 2});

    Val cond = encode(tape, rec.obs, bound, cfg);
    Val pred = crnn_denoise(tape, noisy_leaf, ts + 1, cond, bound, cfg);
    Val ld = diffusion_loss(tape, pred, gt_leaf);

    double ld_value = tape.value(ld).data[0];
    bool gated = adaptive_update(state, epoch, ts, ld_value);

    Val item_loss = ld;
    if (gated && cfg.beta > 0.0) {
      Val lt = traversability_loss(tape, pred, rec.start,
                                   data.worlds[rec.world_index]);
      out.loss_t += tape.value(lt).data[0];
      ++out.gated_items;
      item_loss = tape.add(ld, tape.scale(lt, cfg.beta));
    }
    out.loss_d += ld_value;
    if (bi == 0) out.first_t = ts;
    total = total.valid() ? tape.add(total, item_loss) : item_loss;
  }

  Val loss = tape.scale(total, 1.0 / batch.size());
  double loss_value = tape.value(loss).data[0];
  if (!std::isfinite(loss_value)) {
    std::string diag = "step " + std::to_string(step_index) + " loss " +
                       std::to_string(loss_value);
    fail("non-finite-loss", diag);
  }

  tape.backward(loss);
  std::vector<const Tensor*> grads;
  grads.reserve(bound.vals().size());
  for (Val v : bound.vals()) grads.push_back(&tape.grad(v));
  opt.update(params, grads, cfg);

  out.loss_d /= batch.size();
  out.loss_t /= batch.size();
  out.total = loss_value;
  return out;
}

namespace {
void write_checkpoint(const ParamStore& params, const Config& cfg,
                      const std::string& path) {
  Checkpoint ckpt;
  // copy parameters (ParamStore has no copy-through path via Checkpoint)
  for (const auto& item : params.items()) ckpt.params.add(item.name, item.value);
  ckpt.set_meta("format", "dtg-model");
  ckpt.set_meta("config", cfg.to_key_values());
  ckpt.save(path);
}
}  // namespace

TrainResult train(const Dataset& data, const Config& cfg, const std::string& out_ckpt,
                  const std::string& log_csv_path) {
  data.check_compatible(cfg);
  if (data.records.empty()) fail("bad-input", "dataset has no records");

  ParamStore params;
  init_model_params(params, cfg, cfg.seed);
  AdamState opt(params);
  DiffusionSchedule sched = DiffusionSchedule::make(cfg.steps, cfg.schedule);
  AdaptiveState state(cfg.steps, cfg.gate_max_step, cfg.loss_window, cfg.h_d);

  std::ofstream log;
  if (!log_csv_path.empty()) {
    log.open(log_csv_path, std::ios::trunc);
    if (!log) fail("io", "cannot open train log: " + log_csv_path);
    log << "step,epoch,t,loss_d,loss_t,gated,bt_size\n";
  }

  Rng shuffle_rng(mix64(cfg.seed, hash_str("shuffle")));
  std::vector<std::size_t> order(data.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  int64_t step_index = 0;
  double epoch0_loss_sum = 0.0;
  int64_t epoch0_steps = 0;
  std::size_t bt_size_prev = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the dedicated stream
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(shuffle_rng.range_int(0, static_cast<int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t base = 0; base < order.size(); base += cfg.batch) {
      std::vector<const ScenarioRecord*> batch;
      for (std::size_t k = base; k < std::min(order.size(), base + cfg.batch); ++k)
        batch.push_back(&data.records[order[k]]);
      StepLosses losses =
          train_step(batch, data, params, opt, sched, state, cfg, epoch, step_index);
      if (epoch == 0) {
        epoch0_loss_sum += losses.loss_d;
        ++epoch0_steps;
      }
      if (log.is_open()) {
        char line[160];
        std::snprintf(line, sizeof(line), "%lld,%d,%d,%.9g,%.9g,%d,%zu\n",
                      static_cast<long long>(step_index), epoch, losses.first_t,
                      losses.loss_d, losses.loss_t, losses.gated_items,
                      state.buffer.size());
        log << line;
      }
      result.final_loss_d = losses.loss_d;
      ++step_index;
    }

    // gate buffer must only ever grow
    if (state.buffer.size() < bt_size_prev)
      fail("invariant", "adaptive gate buffer shrank");
    bt_size_prev = state.buffer.size();

    if (epoch == 0 && cfg.h_d < 0.0 && epoch0_steps > 0) {
      state.h_d = 0.5 * (epoch0_loss_sum / epoch0_steps);  // frozen from here on
    }

    if (cfg.ckpt_every > 0 && (epoch + 1) % cfg.ckpt_every == 0 &&
        epoch + 1 < cfg.epochs && !out_ckpt.empty()) {
      write_checkpoint(params, cfg, out_ckpt + ".epoch" + std::to_string(epoch + 1));
    }
  }

  if (!out_ckpt.empty()) {
    write_checkpoint(params, cfg, out_ckpt);
    result.checkpoint_path = out_ckpt;
  }
  result.h_d_used = state.h_d;
  result.steps = step_index;
  return result;
}

}  // namespace dtg
