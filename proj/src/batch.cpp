#include <algorithm>
#include <cmath>

#include "hge/batch.hpp"
#include "hge/rng.hpp"

namespace hge {

namespace {

bool seen_contains(const std::vector<std::uint32_t>& sorted, std::uint32_t item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

// Largest-remainder apportionment of `total` slots over weighted pools,
// capped by each pool's remaining events. Ties go to the smaller category.
std::vector<Index> apportion(const std::vector<double>& weights,
                             const std::vector<Index>& remaining, Index total) {
  const std::size_t n = weights.size();
  double weight_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (remaining[c] > 0) weight_sum += weights[c];
  }
  std::vector<Index> quota(n, 0);
  std::vector<std::pair<double, std::size_t>> rema;  // (-remainder, c) for stable sort
  Index assigned = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (remaining[c] <= 0) continue;
    const double share = static_cast<double>(total) * weights[c] / weight_sum;
    Index q = static_cast<Index>(share);
    q = std::min(q, remaining[c]);
    quota[c] = q;
    assigned += q;
    rema.emplace_back(-(share - std::floor(share)), c);
  }
  std::sort(rema.begin(), rema.end());
  // hand out leftovers by descending remainder, then round-robin spill
  while (assigned < total) {
    bool progressed = false;
    for (const auto& [neg_rem, c] : rema) {
      (void)neg_rem;
      if (assigned >= total) break;
      if (quota[c] < remaining[c]) {
        ++quota[c];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;  // every pool exhausted
  }
  return quota;
}

}  // namespace

std::vector<Batch> make_epoch_batches(const PreparedData& data,
                                      const std::vector<std::vector<std::uint32_t>>& seen_by_user,
                                      const BatchParams& p, std::uint64_t seed, int epoch) {
  if (p.batch_size <= 0) throw ConfigError("batches: batch_size must be positive");
  if (p.negatives_per_positive < 0) {
    throw ConfigError("batches: negatives_per_positive must be >= 0");
  }
  if (p.stratify_level < 1 || p.stratify_level > data.n_levels()) {
    throw ConfigError("batches: stratify_level " + std::to_string(p.stratify_level) +
                      " out of range [1, " + std::to_string(data.n_levels()) + "]");
  }
  if (data.train.empty()) throw EmptyDataError("batches: no train events");

  const SparseIncidence& inc =
      data.levels[static_cast<std::size_t>(p.stratify_level - 1)].incidence;
  const Index n_categories = inc.n_categories();
  if (p.mode == SamplingMode::Uniform && p.batch_size < n_categories) {
    throw ConfigError("batches: uniform mode needs batch_size >= " +
                      std::to_string(n_categories) + " categories, got " +
                      std::to_string(p.batch_size));
  }

  Rng rng(splitmix64(derive_seed(seed, "batches") + static_cast<std::uint64_t>(epoch)));

  // pools of train-event indices per category, each seeded-shuffled
  std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(n_categories));
  for (std::size_t e = 0; e < data.train.size(); ++e) {
    pools[static_cast<std::size_t>(inc.category_of(data.train[e].item))].push_back(e);
  }
  for (auto& pool : pools) rng.shuffle(pool);

  std::vector<double> weights(static_cast<std::size_t>(n_categories), 1.0);
  if (p.mode == SamplingMode::LogProportional) {
    for (Index c = 0; c < n_categories; ++c) {
      weights[static_cast<std::size_t>(c)] =
          std::log1p(static_cast<double>(pools[static_cast<std::size_t>(c)].size()));
    }
  }

  std::vector<Index> remaining(static_cast<std::size_t>(n_categories));
  Index total_remaining = 0;
  for (Index c = 0; c < n_categories; ++c) {
    remaining[static_cast<std::size_t>(c)] =
        static_cast<Index>(pools[static_cast<std::size_t>(c)].size());
    total_remaining += remaining[static_cast<std::size_t>(c)];
  }
  std::vector<std::size_t> cursor(static_cast<std::size_t>(n_categories), 0);

  const Index n_items = data.n_items;
  const std::uint64_t max_tries =
      1000ULL * static_cast<std::uint64_t>(std::max<Index>(n_items, 16));

  std::vector<Batch> batches;
  while (total_remaining > 0) {
    const Index want = std::min<Index>(p.batch_size, total_remaining);
    const std::vector<Index> quota = apportion(weights, remaining, want);

    Batch batch;
    batch.positives.reserve(static_cast<std::size_t>(want));
    for (Index c = 0; c < n_categories; ++c) {
      const auto sc = static_cast<std::size_t>(c);
      for (Index t = 0; t < quota[sc]; ++t) {
        const IndexedEvent& ev = data.train[pools[sc][cursor[sc]++]];
        batch.positives.emplace_back(ev.user, ev.item);
      }
      remaining[sc] -= quota[sc];
      total_remaining -= quota[sc];
    }

    for (const auto& [user, item] : batch.positives) {
      (void)item;
      const auto& seen = seen_by_user[user];
      for (int t = 0; t < p.negatives_per_positive; ++t) {
        std::uint64_t tries = 0;
        std::uint32_t j;
        do {
          j = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(n_items)));
          if (++tries > max_tries) {
            throw DataError("batches: user " + std::to_string(user) +
                            " has interacted with nearly every item; cannot sample negatives");
          }
        } while (seen_contains(seen, j));
        batch.negatives.emplace_back(user, j);
      }
    }

    batch.category_counts.resize(data.levels.size());
    for (std::size_t l = 0; l < data.levels.size(); ++l) {
      batch.category_counts[l].assign(
          static_cast<std::size_t>(data.levels[l].incidence.n_categories()), 0);
      for (const auto& [user, item] : batch.positives) {
        (void)user;
        ++batch.category_counts[l][static_cast<std::size_t>(
            data.levels[l].incidence.category_of(item))];
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace hge
