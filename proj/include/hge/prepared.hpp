#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hge/pipeline.hpp"
#include "hge/split.hpp"

namespace hge {

// Fully reindexed dataset: the in-memory form every model, trainer and
// evaluator works on, and the thing `prepare` serializes to disk.
struct PreparedData {
  Index n_users = 0;
  Index n_items = 0;
  std::vector<IndexedEvent> train;
  std::vector<IndexedEvent> test;         // cold-item events only
  std::vector<std::uint32_t> cold_items;  // sorted item indices
  std::vector<std::string> user_ids;      // index -> original id
  std::vector<std::string> item_ids;
  std::vector<LeveledIncidence> levels;   // level 1 (finest) first
  std::uint64_t seed = 0;                 // split seed echo
  std::size_t dropped_test_only_items = 0;

  int n_levels() const { return static_cast<int>(levels.size()); }

  // per user: sorted unique train items
  std::vector<std::vector<std::uint32_t>> train_items_by_user() const;
};

// Applies the reindexing tables of a finished split and builds per-level
// incidences over the retained items.
PreparedData index_split(const ColdStartSplit& split, const Hierarchy& hierarchy);

void write_prepared(const PreparedData& data, const std::string& dir);
PreparedData load_prepared(const std::string& dir);

}  // namespace hge
