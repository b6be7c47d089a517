#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "hge/data.hpp"
#include "hge/incidence.hpp"

namespace hge {

// Keeps events with value >= threshold as value 1, drops the rest. For logs
// that are already implicit 0/1, run with threshold <= 1 (the default of 3
// targets 1..5 rating scales). May return an empty log; callers that cannot
// proceed on empty data raise then.
InteractionLog binarize(const InteractionLog& log, double threshold = 3.0);

// Iterative (k,k)-core: repeatedly drop users and items with fewer than k
// events until stable. Event order is preserved. The result may be empty.
InteractionLog k_core_filter(const InteractionLog& log, int k = 5);

// Relabels categories with fewer than min_items members (counted over the
// items present in the assignment) to the reserved __OTHER__ bucket.
// Categories with exactly min_items members are kept. Idempotent.
Hierarchy merge_small_categories(const Hierarchy& h, int level, int min_items = 150);

// Drops hierarchy rows for items outside `items`; applied after filtering so
// category sizes reflect the surviving item universe.
Hierarchy restrict_hierarchy(const Hierarchy& h,
                             const std::unordered_set<std::string>& items);

struct LeveledIncidence {
  SparseIncidence incidence;
  std::vector<std::string> labels;  // category index -> label
};

// Dense category indexing for one level over the given item universe.
// Labels are indexed in lexicographic order; an item without an assignment
// at the level is a data error naming the item.
LeveledIncidence build_incidence(const Hierarchy& h, int level, const IdIndex& items);

}  // namespace hge
