#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hge/data.hpp"

namespace hge {

struct SplitParams {
  int test_window_days = 14;
  double cold_fraction = 0.2;
  double downsample = 0.01;  // fraction of each cold item's train events kept
};

// Event with dense user/item indices; the post-reindexing currency of the
// training and evaluation code.
struct IndexedEvent {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  std::int64_t timestamp = 0;
  float value = 1.0f;
};

struct IndexedSplit {
  std::vector<IndexedEvent> train;
  std::vector<IndexedEvent> test;        // cold-item events only
  std::vector<std::uint32_t> cold_items;  // sorted
  std::size_t dropped_test_only_items = 0;
};

// Core split on index-valued events; indices are preserved, never remapped.
// Protocol: (1) the final test_window_days become the test window; (2) items
// whose events all fall inside the test window are dropped (nothing to learn
// from); (3) floor(cold_fraction * #remaining items) items are drawn
// uniformly (seeded) as cold; (4) each cold item keeps a seeded sample of
// max(1, floor(downsample * n)) of its n train events; (5) test is restricted
// to cold-item events.
IndexedSplit cold_start_split_indexed(const std::vector<IndexedEvent>& events,
                                      const SplitParams& p, std::uint64_t seed);

struct ColdStartSplit {
  InteractionLog train;
  InteractionLog test;
  std::set<std::string> cold_items;
  IdIndex user_index;
  IdIndex item_index;
  std::uint64_t seed = 0;
  std::size_t dropped_test_only_items = 0;
};

// String-id wrapper around the indexed core. Index tables cover the ids
// retained by the split (lexicographic order).
ColdStartSplit cold_start_split(const InteractionLog& log, const SplitParams& p,
                                std::uint64_t seed);

}  // namespace hge
