#pragma once

#include "dtg/config.hpp"
#include "dtg/rng.hpp"
#include "dtg/tensor.hpp"
#include "dtg/worldgen.hpp"

namespace dtg {

// Registers the encoder weights under the "perception/" prefix.
// Scan branch: [scan_frames*rays -> scan_hidden -> scan_out], tanh.
// Velocity branch: [vel_frames*2 -> vel_out], tanh.
// Fusion: [scan_out + vel_out + 2 -> fuse_hidden -> cond_dim], tanh.
void init_perception_params(ParamStore& params, const Config& cfg, Rng& rng);

// Builds the condition vector c on the tape. Scans are normalized by
// 1/max_range, the goal by goal_scale, before entering the network.
Val encode(Tape& tape, const Observation& obs, const BoundParams& p, const Config& cfg);

// Convenience forward pass without gradients.
Tensor encode_value(const Observation& obs, const ParamStore& params, const Config& cfg);

}  // namespace dtg
