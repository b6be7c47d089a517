#pragma once

#include <cstdint>
#include <vector>

#include "hge/types.hpp"

namespace hge {

// Item -> category map for one hierarchy level, with the inverse member
// lists materialized. Categories are a partition: every item belongs to
// exactly one category, ids are dense 0..K-1 and every category is
// non-empty (enforced at construction).
class SparseIncidence {
 public:
  SparseIncidence() = default;
  SparseIncidence(Index n_items, std::vector<std::int32_t> category_of);

  Index n_items() const { return n_items_; }
  Index n_categories() const { return n_categories_; }

  std::int32_t category_of(Index item) const {
    if (item < 0 || item >= n_items_) {
      throw DataError("incidence: item index " + std::to_string(item) +
                      " out of range [0, " + std::to_string(n_items_) + ")");
    }
    return category_of_[static_cast<std::size_t>(item)];
  }

  const std::vector<std::int32_t>& category_of_all() const { return category_of_; }

  const std::vector<Index>& members(Index category) const {
    if (category < 0 || category >= n_categories_) {
      throw DataError("incidence: category index " + std::to_string(category) +
                      " out of range [0, " + std::to_string(n_categories_) + ")");
    }
    return members_[static_cast<std::size_t>(category)];
  }

 private:
  Index n_items_ = 0;
  Index n_categories_ = 0;
  std::vector<std::int32_t> category_of_;
  std::vector<std::vector<Index>> members_;  // ascending item indices
};

}  // namespace hge
