#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hge/prepared.hpp"

namespace hge {

enum class SamplingMode { Uniform, LogProportional };

struct BatchParams {
  Index batch_size = 1024;
  SamplingMode mode = SamplingMode::LogProportional;
  int negatives_per_positive = 4;
  int stratify_level = 1;
};

struct Batch {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positives;  // (user, item)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> negatives;
  // per level: positive-item counts per category (diagnostics + tests)
  std::vector<std::vector<std::int32_t>> category_counts;
};

// One epoch: a seeded partition of all train positives into batches whose
// per-category composition follows the sampling mode — equal counts (+-1)
// for Uniform, largest-remainder shares of ln(1 + pool size) for
// LogProportional (pool size = train positives in the category). Quotas are
// recomputed over the categories that still have events, so late batches
// stay balanced as pools drain; the final batch may be short. Negatives are
// drawn uniformly per positive, rejection-sampled against the user's train
// items.
std::vector<Batch> make_epoch_batches(const PreparedData& data,
                                      const std::vector<std::vector<std::uint32_t>>& seen_by_user,
                                      const BatchParams& p, std::uint64_t seed, int epoch);

}  // namespace hge
