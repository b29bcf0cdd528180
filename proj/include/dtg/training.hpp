#pragma once

#include <deque>
#include <set>
#include <string>
#include <vector>

#include "dtg/config.hpp"
#include "dtg/dataset.hpp"
#include "dtg/diffusion.hpp"
#include "dtg/tensor.hpp"

namespace dtg {

// Mean squared error between predicted and ground-truth increments, over all
// 2M scalars (the SNR-difference weight of the full objective is dropped; it
// is always positive and training behaves the same without it).
Val diffusion_loss(Tape& tape, Val predicted, Val target_leaf);
double diffusion_loss_value(const Tensor& predicted, const Trajectory& gt);

// exp(1 - mean_m clearance(w_m)) with the clipped clearance field sampled
// bilinearly at the world-frame waypoints; ranges over [1, e].
Val traversability_loss(Tape& tape, Val predicted_increments, const Pose& start,
                        const GridWorld& world);

// Step-gating state: per-step loss ring buffers, the gate threshold, and the
// monotone buffer of steps the traversability loss currently applies to.
struct AdaptiveState {
  int n_steps = 0;       // N
  int gate_max = 10;     // N_t
  int window = 5;        // ring buffer depth, "last 5 recorded"
  double h_d = -1.0;     // threshold; < 0 means not yet frozen (auto mode)
  std::set<int> buffer;  // b_t, only ever grows
  std::vector<std::deque<double>> history;  // per-step recorded losses

  AdaptiveState() = default;
  AdaptiveState(int n, int gate_max_step, int loss_window, double threshold);

  double mean_recent(int step) const;  // mean of last `window` at `step`, or +inf
};

// Records `loss_d` at step `t`, grows the gate buffer when the previous step's
// recent mean has fallen below the threshold, and reports whether the
// traversability loss applies at `t`. `t` is 0-based over [0, N-1].
bool adaptive_update(AdaptiveState& state, int epoch, int t, double loss_d);

// Adam with bias correction; state layout follows the ParamStore order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  int64_t step = 0;

  explicit AdamState(const ParamStore& params);
  void update(ParamStore& params, const std::vector<const Tensor*>& grads,
              const Config& cfg);
};

struct StepLosses {
  double loss_d = 0.0;   // batch mean diffusion loss
  double loss_t = 0.0;   // batch mean gated traversability loss (0 when none)
  double total = 0.0;
  int gated_items = 0;
  int first_t = -1;      // sampled step of the first batch item, for the log
};

// One optimization step over a batch of records. Samples t per item, noises
// the ground truth, denoises, applies the gated loss sum, backprops, and
// performs the Adam update. Throws "non-finite-loss" without touching the
// parameters if the loss is not finite.
StepLosses train_step(const std::vector<const ScenarioRecord*>& batch,
                      const Dataset& data, ParamStore& params, AdamState& opt,
                      const DiffusionSchedule& sched, AdaptiveState& state,
                      const Config& cfg, int epoch, int64_t step_index);

struct TrainResult {
  double final_loss_d = 0.0;
  double h_d_used = 0.0;
  int64_t steps = 0;
  std::string checkpoint_path;
};

// Full loop: epochs x shuffled batches, CSV step log, per-epoch gate audit,
// checkpoint(s). The auto threshold (h_d < 0) freezes to 0.5 x the epoch-0
// mean diffusion loss at the end of epoch 0.
TrainResult train(const Dataset& data, const Config& cfg, const std::string& out_ckpt,
                  const std::string& log_csv_path);

void init_model_params(ParamStore& params, const Config& cfg, uint64_t seed);

}  // namespace dtg
