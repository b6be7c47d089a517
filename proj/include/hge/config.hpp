#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hge/als.hpp"
#include "hge/eval.hpp"
#include "hge/split.hpp"
#include "hge/synth.hpp"
#include "hge/train.hpp"

namespace hge {

// Mirrors the JSON config file section by section. Parsing is strict: an
// unknown key or a wrong type anywhere is a config error naming the key, so
// typos fail fast instead of silently running with defaults.
struct DataSection {
  std::string interactions;           // events CSV
  std::string hierarchy;              // category CSV
  std::string prepared_dir;           // consume a previous prepare run instead
  double binarize_threshold = 3.0;
  int k_core = 5;
  int min_category_items = 150;
};

struct SplitSection {
  int test_window_days = 14;
  double cold_fraction = 0.2;
  double downsample = 0.01;
  std::uint64_t seed = 13;
};

struct ModelSection {
  std::string kind = "hge";
  int d = 32;
  int h = 32;
  std::vector<int> levels;            // empty = every level
  bool skip = true;
  bool masked_softmax = true;
  std::string activation = "relu";
  double leaky_alpha = 0.01;
  double als_lambda_x = 0.1;
  double als_lambda_y = 0.1;
  double als_alpha = 40.0;
  int als_iterations = 15;
};

struct TrainSection {
  double learning_rate = 0.01;
  int epochs = 30;
  int batch_size = 1024;
  int negatives_per_positive = 4;
  double l2_user = 1e-6;
  double l2_item = 1e-6;
  double l2_layer = 1e-6;
  std::string optimizer = "adam";
  std::string loss = "bce";
  std::string sampling = "log";       // "uniform" | "log"
  int stratify_level = 1;
  std::uint64_t seed = 7;
};

struct EvalSection {
  std::vector<int> ks = {10, 20};
  std::string candidates = "cold";  // or "all": rank every unseen item
  std::uint64_t seed = 99;
  std::uint64_t cluster_pairs = 10000;
};

struct SynthSection {
  int n_users = 2000;
  int n_items = 1000;
  int n_levels = 2;
  std::vector<int> branching = {10, 5};
  int d_true = 8;
  double noise = 0.25;
  int interactions_per_user = 25;
  int span_days = 90;
  double temperature = 1.0;
  std::uint64_t seed = 42;
};

struct GridSection {
  std::vector<int> d_grid = {16, 32, 64};
  std::vector<double> lr_grid = {0.003, 0.01, 0.03};
  int k = 10;
  int validation_window_days = 14;
};

struct BenchmarkSection {
  std::vector<int> d_values = {20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
  int batch_size = 4096;
  int h = 32;
  int warmup_epochs = 1;
  int timed_epochs = 3;
  std::uint64_t seed = 7;
};

struct RunConfig {
  DataSection data;
  SplitSection split;
  ModelSection model;
  TrainSection train;
  EvalSection eval;
  SynthSection synth;
  GridSection grid;
  BenchmarkSection benchmark;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Fully populated echo of the effective configuration (defaults included),
// written next to every run's outputs.
nlohmann::json resolved_config(const RunConfig& c);

// Sets every section seed to one master value (the CLI --seed override).
void override_seeds(RunConfig& c, std::uint64_t seed);

// Section-to-module translations (with the section-level validation that the
// modules cannot express, e.g. name -> enum).
SplitParams make_split_params(const RunConfig& c);
TrainConfig make_train_config(const RunConfig& c);
AlsParams make_als_params(const RunConfig& c);
SynthParams make_synth_params(const RunConfig& c);
ModelKind make_model_kind(const RunConfig& c);
CandidateMode make_candidate_mode(const RunConfig& c);

}  // namespace hge
