#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "hge/rng.hpp"
#include "hge/types.hpp"

namespace hge {

// Top-k by score over candidates minus the exclusion list (both item
// indices; exclude must be sorted). Ordering is by descending score with
// ties broken by ascending item index, so rankings are reproducible. If
// fewer candidates remain than k the list is simply shorter.
template <class ScoreFn>
std::vector<Index> recommend_topk(ScoreFn&& score, const std::vector<Index>& candidates,
                                  const std::vector<Index>& exclude_sorted, Index k) {
  if (k <= 0) throw ConfigError("recommend_topk: k must be positive");
  std::vector<std::pair<double, Index>> scored;
  scored.reserve(candidates.size());
  for (Index i : candidates) {
    if (std::binary_search(exclude_sorted.begin(), exclude_sorted.end(), i)) continue;
    scored.emplace_back(static_cast<double>(score(i)), i);
  }
  const auto better = [](const std::pair<double, Index>& a, const std::pair<double, Index>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  std::vector<Index> out;
  out.reserve(take);
  for (std::size_t j = 0; j < take; ++j) out.push_back(scored[j].second);
  return out;
}

// Seeded uniform sample without replacement; the user index only perturbs
// the stream so different users get different draws from one seed.
inline std::vector<Index> random_recommend(Index u, Index k, const std::vector<Index>& candidates,
                                           std::uint64_t seed) {
  if (k <= 0) throw ConfigError("random_recommend: k must be positive");
  Rng rng(splitmix64(seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(u) + 1)));
  return rng.sample(candidates, static_cast<std::size_t>(k));
}

}  // namespace hge
