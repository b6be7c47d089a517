#include "hge/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "hge/batch.hpp"

namespace hge {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string hardware_note() {
  std::string model = "unknown cpu";
  int cores = 0;
  std::ifstream is("/proc/cpuinfo");
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("processor", 0) == 0) ++cores;
    if (model == "unknown cpu" && line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto text = line.substr(colon + 1);
        const auto start = text.find_first_not_of(" \t");
        if (start != std::string::npos) model = text.substr(start);
      }
    }
  }
  if (cores == 0) cores = static_cast<int>(std::thread::hardware_concurrency());
  return std::to_string(cores) + "x " + model + " (1 thread used)";
}

double timed_median_epochs(GdTrainer& trainer, const std::vector<std::vector<Batch>>& epochs,
                           int warmup_epochs, int timed_epochs) {
  for (int e = 0; e < warmup_epochs; ++e) trainer.run_epoch(epochs[static_cast<std::size_t>(e)]);
  std::vector<double> seconds;
  for (int e = 0; e < timed_epochs; ++e) {
    const auto& batches = epochs[static_cast<std::size_t>(warmup_epochs + e)];
    const auto t0 = std::chrono::steady_clock::now();
    trainer.run_epoch(batches);
    const auto t1 = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  return median(std::move(seconds));
}

}  // namespace

TimingReport timing_benchmark(const PreparedData& data, const std::vector<Index>& d_values,
                              const TrainConfig& base, int warmup_epochs, int timed_epochs) {
  if (d_values.empty()) throw ConfigError("benchmark: no embedding sizes given");
  for (Index d : d_values) {
    if (d < 1) throw ConfigError("benchmark: d must be >= 1");
  }
  if (warmup_epochs < 0) throw ConfigError("benchmark: warmup_epochs must be >= 0");
  if (timed_epochs < 1) throw ConfigError("benchmark: timed_epochs must be >= 1");

  TrainConfig cfg = base;
  cfg.optimizer = OptimizerKind::Sgd;  // keep the measurement about the forward/backward cost
  cfg.epochs = warmup_epochs + timed_epochs;

  // one shared batch stream: identical bytes for both models and every d
  BatchParams bp;
  bp.batch_size = cfg.batch_size;
  bp.mode = cfg.sampling_mode;
  bp.negatives_per_positive = cfg.negatives_per_positive;
  bp.stratify_level = cfg.stratify_level;
  const auto seen = data.train_items_by_user();
  std::vector<std::vector<Batch>> epochs;
  for (int e = 0; e < cfg.epochs; ++e) {
    epochs.push_back(make_epoch_batches(data, seen, bp, cfg.seed, e));
  }

  TimingReport report;
  report.warmup_epochs = warmup_epochs;
  report.timed_epochs = timed_epochs;
  report.h = cfg.h;
  report.batch_size = cfg.batch_size;
  report.hardware = hardware_note();

  for (Index d : d_values) {
    TrainConfig cd = cfg;
    cd.d = d;
    GdTrainer base_trainer(init_hge_model(data, cd, false), cd);
    GdTrainer layered_trainer(init_hge_model(data, cd, true), cd);
    if (report.layers == 0) {
      report.layers = static_cast<int>(layered_trainer.model().layers.size());
    }

    TimingRow row;
    row.d = d;
    row.base_epoch_seconds = timed_median_epochs(base_trainer, epochs, warmup_epochs, timed_epochs);
    row.layered_epoch_seconds =
        timed_median_epochs(layered_trainer, epochs, warmup_epochs, timed_epochs);
    row.ratio = row.layered_epoch_seconds / row.base_epoch_seconds;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace hge
