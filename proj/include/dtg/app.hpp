#pragma once

#include <string>
#include <vector>

#include "dtg/config.hpp"
#include "dtg/metrics.hpp"
#include "dtg/navsim.hpp"

namespace dtg {
namespace app {

// Pipeline stages behind the CLI subcommands. Each writes its outputs plus a
// <output>.manifest.json recording the tool version, config snapshot, seed,
// and input-file hashes, so any stage can be re-run identically.

struct WorldGenOpts {
  uint64_t seed = 42;
  std::string out;
  Config cfg;
};
void world_gen(const WorldGenOpts& opts);

struct DatasetOpts {
  std::string worlds_dir;  // reads all *.dtgw, sorted by name
  int count = 100;
  std::string mode = "train";
  uint64_t seed = 42;
  std::string out;
  Config cfg;
};
void dataset_build(const DatasetOpts& opts);

struct TrainOpts {
  std::string dataset;
  std::string out_ckpt;
  std::string log_csv;  // defaults to <out_ckpt>.log.csv
  Config cfg;
};
void train_model(const TrainOpts& opts);

struct EvalOpts {
  std::string ckpt;
  std::string scenarios;  // dataset file
  std::string out_csv;
  uint64_t seed = 42;
};
std::vector<EvalRecord> evaluate(const EvalOpts& opts);

struct SimOpts {
  std::string ckpt;
  std::string world;
  int episodes = 10;
  uint64_t seed = 42;
  std::string out_csv;
  std::string trace_dir;  // empty disables per-step traces
  std::string mode = "test";
};
struct SimSummary {
  int episodes = 0;
  int reached = 0;
  double mean_interventions = 0.0;
  double mean_travel = 0.0;
};
SimSummary simulate(const SimOpts& opts);

struct ReportOpts {
  std::vector<std::string> results_csvs;
  std::string out_dir;  // SVG histograms land here; empty = table only
};
void report(const ReportOpts& opts, std::ostream& os);

// Loads the model + the config stored in its checkpoint.
struct LoadedModel {
  ParamStore params;
  Config cfg;
  DiffusionSchedule sched;
};
LoadedModel load_model(const std::string& ckpt_path);

uint64_t file_hash(const std::string& path);  // FNV-1a over the bytes
void write_manifest(const std::string& out_path, const std::string& stage,
                    uint64_t seed, const Config& cfg,
                    const std::vector<std::string>& inputs);

}  // namespace app
}  // namespace dtg
