#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hge/incidence.hpp"
#include "hge/types.hpp"

namespace hge {

struct Event {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;  // seconds
  float value = 0.0f;
};

struct InteractionLog {
  std::vector<Event> events;
  bool empty() const { return events.empty(); }
  std::size_t size() const { return events.size(); }
};

// Per-level item -> category-label maps. Level 1 is the finest grouping and
// is stored first; assignment[l-1] holds level l.
struct Hierarchy {
  int n_levels = 0;
  std::vector<std::unordered_map<std::string, std::string>> assignment;

  const std::unordered_map<std::string, std::string>& level(int l) const {
    if (l < 1 || l > n_levels) {
      throw DataError("hierarchy: level " + std::to_string(l) + " out of range [1, " +
                      std::to_string(n_levels) + "]");
    }
    return assignment[static_cast<std::size_t>(l - 1)];
  }
};

// reserved label for the small-category merge
inline const char* kOtherCategory = "__OTHER__";

// Bijection between retained string ids and dense indices 0..n-1,
// ordered lexicographically so it is independent of input order.
class IdIndex {
 public:
  IdIndex() = default;
  static IdIndex from_ids(std::vector<std::string> ids);  // sorts + dedups

  Index size() const { return static_cast<Index>(ids_.size()); }

  Index at(const std::string& id) const {
    auto it = to_index_.find(id);
    if (it == to_index_.end()) throw DataError("id index: unknown id '" + id + "'");
    return it->second;
  }

  std::optional<Index> find(const std::string& id) const {
    auto it = to_index_.find(id);
    if (it == to_index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& id(Index idx) const {
    if (idx < 0 || idx >= size()) {
      throw DataError("id index: index " + std::to_string(idx) + " out of range");
    }
    return ids_[static_cast<std::size_t>(idx)];
  }

  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> to_index_;
};

// Interactions table: header `user_id,item_id,timestamp,value`. Malformed
// rows abort with the line number unless skip_bad_rows is set, in which case
// they are counted into *skipped.
InteractionLog load_interactions(const std::string& path, bool skip_bad_rows = false,
                                 std::size_t* skipped = nullptr);

// Hierarchy table: header `item_id,level_1,...,level_L`, finest level first.
Hierarchy load_hierarchy(const std::string& path);

void save_interactions(const InteractionLog& log, const std::string& path);
void save_hierarchy(const Hierarchy& h, const std::string& path);

}  // namespace hge
