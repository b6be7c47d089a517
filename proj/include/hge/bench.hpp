#pragma once

#include <string>
#include <vector>

#include "hge/prepared.hpp"
#include "hge/train.hpp"

namespace hge {

struct TimingRow {
  Index d = 0;
  double base_epoch_seconds = 0.0;     // embedding-only model
  double layered_epoch_seconds = 0.0;  // same model plus the full layer stack
  double ratio = 0.0;                  // layered / base
};

struct TimingReport {
  std::vector<TimingRow> rows;
  int warmup_epochs = 1;
  int timed_epochs = 3;
  int layers = 0;
  Index h = 0;
  Index batch_size = 0;
  std::string hardware;
};

// Wall-clock cost of the layer stack: for each d, trains an embedding-only
// model and a layered one over byte-identical pregenerated batch sequences
// (plain sgd, single thread) and reports the median timed epoch. Batch
// generation happens outside the clock.
TimingReport timing_benchmark(const PreparedData& data, const std::vector<Index>& d_values,
                              const TrainConfig& base, int warmup_epochs = 1,
                              int timed_epochs = 3);

}  // namespace hge
