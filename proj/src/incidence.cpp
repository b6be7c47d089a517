#include "hge/incidence.hpp"

namespace hge {

SparseIncidence::SparseIncidence(Index n_items, std::vector<std::int32_t> category_of)
    : n_items_(n_items), category_of_(std::move(category_of)) {
  if (static_cast<Index>(category_of_.size()) != n_items_) {
    throw ShapeError("incidence: " + std::to_string(category_of_.size()) +
                     " assignments for " + std::to_string(n_items_) + " items");
  }
  std::int32_t max_cat = -1;
  for (std::int32_t c : category_of_) {
    if (c < 0) throw DataError("incidence: negative category id");
    max_cat = std::max(max_cat, c);
  }
  n_categories_ = static_cast<Index>(max_cat) + 1;
  members_.assign(static_cast<std::size_t>(n_categories_), {});
  for (Index i = 0; i < n_items_; ++i) {
    members_[static_cast<std::size_t>(category_of_[static_cast<std::size_t>(i)])].push_back(i);
  }
  for (Index c = 0; c < n_categories_; ++c) {
    if (members_[static_cast<std::size_t>(c)].empty()) {
      throw DataError("incidence: category " + std::to_string(c) +
                      " has no members (ids must be dense)");
    }
  }
}

}  // namespace hge
