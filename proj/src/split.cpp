#include <algorithm>
#include <limits>
#include <unordered_set>

#include "hge/rng.hpp"
#include "hge/split.hpp"

namespace hge {

namespace {
constexpr std::int64_t kSecondsPerDay = 86400;
}

IndexedSplit cold_start_split_indexed(const std::vector<IndexedEvent>& events,
                                      const SplitParams& p, std::uint64_t seed) {
  if (events.empty()) throw EmptyDataError("cold_start_split: empty interaction log");
  if (p.test_window_days <= 0) throw ConfigError("cold_start_split: test_window_days must be positive");
  if (!(p.cold_fraction > 0.0) || !(p.cold_fraction < 1.0)) {
    throw ConfigError("cold_start_split: cold_fraction must lie in (0, 1)");
  }
  if (!(p.downsample > 0.0) || p.downsample > 1.0) {
    throw ConfigError("cold_start_split: downsample must lie in (0, 1]");
  }

  std::int64_t min_ts = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_ts = std::numeric_limits<std::int64_t>::min();
  for (const IndexedEvent& ev : events) {
    min_ts = std::min(min_ts, ev.timestamp);
    max_ts = std::max(max_ts, ev.timestamp);
  }
  const std::int64_t cutoff = max_ts - static_cast<std::int64_t>(p.test_window_days) * kSecondsPerDay;
  if (min_ts > cutoff) {
    throw DataError("cold_start_split: log spans less than test_window_days; train would be empty");
  }

  // pass 1: window membership and which items have any train event
  std::unordered_set<std::uint32_t> train_items;
  for (const IndexedEvent& ev : events) {
    if (ev.timestamp <= cutoff) train_items.insert(ev.item);
  }
  std::unordered_set<std::uint32_t> all_items;
  for (const IndexedEvent& ev : events) all_items.insert(ev.item);
  const std::size_t dropped = all_items.size() - train_items.size();

  std::vector<std::uint32_t> eligible(train_items.begin(), train_items.end());
  std::sort(eligible.begin(), eligible.end());

  const std::size_t n_cold =
      static_cast<std::size_t>(p.cold_fraction * static_cast<double>(eligible.size()));
  if (n_cold == 0) {
    throw DataError("cold_start_split: zero cold items (" + std::to_string(eligible.size()) +
                    " items at cold_fraction " + std::to_string(p.cold_fraction) + ")");
  }

  Rng cold_rng(derive_seed(seed, "split:cold"));
  std::vector<std::uint32_t> cold_vec = cold_rng.sample(eligible, n_cold);
  std::sort(cold_vec.begin(), cold_vec.end());
  std::unordered_set<std::uint32_t> cold(cold_vec.begin(), cold_vec.end());

  // per cold item: positions of its train events, in log order
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> cold_train_pos;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const IndexedEvent& ev = events[e];
    if (ev.timestamp <= cutoff && cold.count(ev.item)) {
      cold_train_pos[ev.item].push_back(e);
    }
  }

  // one sequential stream over cold items in ascending order keeps the
  // draw order independent of hash-map iteration
  Rng keep_rng(derive_seed(seed, "split:downsample"));
  std::vector<char> keep(events.size(), 1);
  for (std::uint32_t item : cold_vec) {
    auto& positions = cold_train_pos[item];
    const std::size_t n = positions.size();
    const std::size_t n_keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(p.downsample * static_cast<double>(n)));
    std::vector<std::size_t> chosen = keep_rng.sample(positions, n_keep);
    std::unordered_set<std::size_t> chosen_set(chosen.begin(), chosen.end());
    for (std::size_t pos : positions) {
      if (!chosen_set.count(pos)) keep[pos] = 0;
    }
  }

  IndexedSplit out;
  out.dropped_test_only_items = dropped;
  out.cold_items = std::move(cold_vec);
  for (std::size_t e = 0; e < events.size(); ++e) {
    const IndexedEvent& ev = events[e];
    if (ev.timestamp <= cutoff) {
      if (keep[e]) out.train.push_back(ev);
    } else if (cold.count(ev.item)) {
      out.test.push_back(ev);
    }
  }
  if (out.test.empty()) {
    throw DataError("cold_start_split: no cold-item events in the test window");
  }
  return out;
}

ColdStartSplit cold_start_split(const InteractionLog& log, const SplitParams& p,
                                std::uint64_t seed) {
  if (log.empty()) throw EmptyDataError("cold_start_split: empty interaction log");

  // temporary indices over the raw log; the final tables cover retained ids
  std::vector<std::string> user_ids, item_ids;
  user_ids.reserve(log.size());
  item_ids.reserve(log.size());
  for (const Event& ev : log.events) {
    user_ids.push_back(ev.user_id);
    item_ids.push_back(ev.item_id);
  }
  const IdIndex users_tmp = IdIndex::from_ids(std::move(user_ids));
  const IdIndex items_tmp = IdIndex::from_ids(std::move(item_ids));

  std::vector<IndexedEvent> events;
  events.reserve(log.size());
  for (const Event& ev : log.events) {
    events.push_back(IndexedEvent{static_cast<std::uint32_t>(users_tmp.at(ev.user_id)),
                                  static_cast<std::uint32_t>(items_tmp.at(ev.item_id)),
                                  ev.timestamp, ev.value});
  }

  IndexedSplit split = cold_start_split_indexed(events, p, seed);

  std::vector<std::string> kept_users, kept_items;
  for (const IndexedEvent& ev : split.train) {
    kept_users.push_back(users_tmp.id(ev.user));
    kept_items.push_back(items_tmp.id(ev.item));
  }
  for (const IndexedEvent& ev : split.test) {
    kept_users.push_back(users_tmp.id(ev.user));
    kept_items.push_back(items_tmp.id(ev.item));
  }

  ColdStartSplit out;
  out.seed = seed;
  out.dropped_test_only_items = split.dropped_test_only_items;
  out.user_index = IdIndex::from_ids(std::move(kept_users));
  out.item_index = IdIndex::from_ids(std::move(kept_items));
  for (std::uint32_t item : split.cold_items) {
    out.cold_items.insert(items_tmp.id(item));
  }
  auto to_event = [&](const IndexedEvent& ev) {
    return Event{users_tmp.id(ev.user), items_tmp.id(ev.item), ev.timestamp, ev.value};
  };
  out.train.events.reserve(split.train.size());
  for (const IndexedEvent& ev : split.train) out.train.events.push_back(to_event(ev));
  out.test.events.reserve(split.test.size());
  for (const IndexedEvent& ev : split.test) out.test.events.push_back(to_event(ev));
  return out;
}

}  // namespace hge
