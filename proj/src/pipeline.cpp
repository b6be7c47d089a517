#include <algorithm>
#include <map>

#include "hge/pipeline.hpp"

namespace hge {

InteractionLog binarize(const InteractionLog& log, double threshold) {
  InteractionLog out;
  out.events.reserve(log.events.size());
  for (const Event& ev : log.events) {
    if (static_cast<double>(ev.value) >= threshold) {
      Event kept = ev;
      kept.value = 1.0f;
      out.events.push_back(std::move(kept));
    }
  }
  return out;
}

InteractionLog k_core_filter(const InteractionLog& log, int k) {
  if (k <= 0) throw ConfigError("k_core_filter: k must be positive");
  std::unordered_map<std::string, int> user_deg, item_deg;
  std::vector<char> alive(log.events.size(), 1);
  for (const Event& ev : log.events) {
    ++user_deg[ev.user_id];
    ++item_deg[ev.item_id];
  }
  // peel until a full pass removes nothing
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t e = 0; e < log.events.size(); ++e) {
      if (!alive[e]) continue;
      const Event& ev = log.events[e];
      if (user_deg[ev.user_id] < k || item_deg[ev.item_id] < k) {
        alive[e] = 0;
        --user_deg[ev.user_id];
        --item_deg[ev.item_id];
        changed = true;
      }
    }
  }
  InteractionLog out;
  for (std::size_t e = 0; e < log.events.size(); ++e) {
    if (alive[e]) out.events.push_back(log.events[e]);
  }
  return out;
}

Hierarchy merge_small_categories(const Hierarchy& h, int level, int min_items) {
  if (level < 1 || level > h.n_levels) {
    throw DataError("merge_small_categories: level " + std::to_string(level) +
                    " out of range [1, " + std::to_string(h.n_levels) + "]");
  }
  if (min_items < 0) throw ConfigError("merge_small_categories: min_items must be >= 0");
  const auto& assign = h.assignment[static_cast<std::size_t>(level - 1)];
  std::unordered_map<std::string, int> sizes;
  for (const auto& [item, label] : assign) {
    (void)item;
    ++sizes[label];
  }
  Hierarchy out = h;
  auto& target = out.assignment[static_cast<std::size_t>(level - 1)];
  for (auto& [item, label] : target) {
    (void)item;
    if (sizes[label] < min_items) label = kOtherCategory;
  }
  return out;
}

Hierarchy restrict_hierarchy(const Hierarchy& h,
                             const std::unordered_set<std::string>& items) {
  Hierarchy out;
  out.n_levels = h.n_levels;
  out.assignment.resize(h.assignment.size());
  for (std::size_t l = 0; l < h.assignment.size(); ++l) {
    for (const auto& [item, label] : h.assignment[l]) {
      if (items.count(item)) out.assignment[l].emplace(item, label);
    }
  }
  return out;
}

LeveledIncidence build_incidence(const Hierarchy& h, int level, const IdIndex& items) {
  if (level < 1 || level > h.n_levels) {
    throw DataError("build_incidence: level " + std::to_string(level) +
                    " out of range [1, " + std::to_string(h.n_levels) + "]");
  }
  if (items.size() == 0) throw EmptyDataError("build_incidence: empty item index");
  const auto& assign = h.assignment[static_cast<std::size_t>(level - 1)];

  // stable category indexing: labels sorted lexicographically
  std::map<std::string, std::int32_t> label_index;
  for (Index i = 0; i < items.size(); ++i) {
    const std::string& item = items.id(i);
    auto it = assign.find(item);
    if (it == assign.end()) {
      throw DataError("build_incidence: item '" + item + "' has no category at level " +
                      std::to_string(level));
    }
    label_index.emplace(it->second, 0);
  }
  std::vector<std::string> labels;
  labels.reserve(label_index.size());
  for (auto& [label, idx] : label_index) {
    idx = static_cast<std::int32_t>(labels.size());
    labels.push_back(label);
  }

  std::vector<std::int32_t> category_of(static_cast<std::size_t>(items.size()));
  for (Index i = 0; i < items.size(); ++i) {
    category_of[static_cast<std::size_t>(i)] = label_index.at(assign.at(items.id(i)));
  }
  return LeveledIncidence{SparseIncidence(items.size(), std::move(category_of)),
                          std::move(labels)};
}

}  // namespace hge
