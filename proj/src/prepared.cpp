#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hge/prepared.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hge {

namespace {

constexpr char kEventsMagic[4] = {'H', 'G', 'E', 'T'};
constexpr char kLevelsMagic[4] = {'H', 'G', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated file '" + path + "'");
  return v;
}

void write_events(const std::vector<IndexedEvent>& events, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kEventsMagic, 4);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(events.size()));
  for (const IndexedEvent& ev : events) {
    put(out, ev.user);
    put(out, ev.item);
    put(out, ev.timestamp);
    put(out, ev.value);
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<IndexedEvent> read_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kEventsMagic, 4) != 0) {
    throw IoError("'" + path + "' is not an event table");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion) {
    throw IoError("'" + path + "': unsupported version " + std::to_string(version));
  }
  const auto n = get<std::uint64_t>(in, path);
  std::vector<IndexedEvent> events(n);
  for (std::uint64_t e = 0; e < n; ++e) {
    events[e].user = get<std::uint32_t>(in, path);
    events[e].item = get<std::uint32_t>(in, path);
    events[e].timestamp = get<std::int64_t>(in, path);
    events[e].value = get<float>(in, path);
  }
  return events;
}

void write_ids(const std::vector<std::string>& ids, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "index\tid\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << '\t' << ids[i] << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<std::string> read_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError("'" + path + "': malformed row");
    ids.push_back(line.substr(tab + 1));
  }
  return ids;
}

void write_levels(const std::vector<LeveledIncidence>& levels, Index n_items,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kLevelsMagic, 4);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint32_t>(levels.size()));
  for (const LeveledIncidence& lvl : levels) {
    put(out, static_cast<std::uint32_t>(lvl.incidence.n_categories()));
    for (Index i = 0; i < n_items; ++i) {
      put(out, static_cast<std::uint32_t>(lvl.incidence.category_of(i)));
    }
    for (const std::string& label : lvl.labels) {
      put(out, static_cast<std::uint32_t>(label.size()));
      out.write(label.data(), static_cast<std::streamsize>(label.size()));
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<LeveledIncidence> read_levels(Index n_items, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kLevelsMagic, 4) != 0) {
    throw IoError("'" + path + "' is not a level table");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion) {
    throw IoError("'" + path + "': unsupported version " + std::to_string(version));
  }
  const auto n_levels = get<std::uint32_t>(in, path);
  std::vector<LeveledIncidence> levels;
  levels.reserve(n_levels);
  for (std::uint32_t l = 0; l < n_levels; ++l) {
    const auto n_cats = get<std::uint32_t>(in, path);
    std::vector<std::int32_t> category_of(static_cast<std::size_t>(n_items));
    for (Index i = 0; i < n_items; ++i) {
      category_of[static_cast<std::size_t>(i)] =
          static_cast<std::int32_t>(get<std::uint32_t>(in, path));
    }
    std::vector<std::string> labels(n_cats);
    for (std::uint32_t c = 0; c < n_cats; ++c) {
      const auto len = get<std::uint32_t>(in, path);
      labels[c].resize(len);
      in.read(labels[c].data(), len);
      if (!in) throw IoError("truncated file '" + path + "'");
    }
    levels.push_back(LeveledIncidence{SparseIncidence(n_items, std::move(category_of)),
                                      std::move(labels)});
  }
  return levels;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> PreparedData::train_items_by_user() const {
  std::vector<std::vector<std::uint32_t>> seen(static_cast<std::size_t>(n_users));
  for (const IndexedEvent& ev : train) {
    seen[ev.user].push_back(ev.item);
  }
  for (auto& items : seen) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return seen;
}

PreparedData index_split(const ColdStartSplit& split, const Hierarchy& hierarchy) {
  PreparedData out;
  out.seed = split.seed;
  out.dropped_test_only_items = split.dropped_test_only_items;
  out.n_users = split.user_index.size();
  out.n_items = split.item_index.size();
  out.user_ids = split.user_index.ids();
  out.item_ids = split.item_index.ids();

  auto to_indexed = [&](const Event& ev) {
    return IndexedEvent{static_cast<std::uint32_t>(split.user_index.at(ev.user_id)),
                        static_cast<std::uint32_t>(split.item_index.at(ev.item_id)),
                        ev.timestamp, ev.value};
  };
  out.train.reserve(split.train.size());
  for (const Event& ev : split.train.events) out.train.push_back(to_indexed(ev));
  out.test.reserve(split.test.size());
  for (const Event& ev : split.test.events) out.test.push_back(to_indexed(ev));

  out.cold_items.reserve(split.cold_items.size());
  for (const std::string& id : split.cold_items) {
    out.cold_items.push_back(static_cast<std::uint32_t>(split.item_index.at(id)));
  }
  std::sort(out.cold_items.begin(), out.cold_items.end());

  for (int l = 1; l <= hierarchy.n_levels; ++l) {
    out.levels.push_back(build_incidence(hierarchy, l, split.item_index));
  }
  return out;
}

void write_prepared(const PreparedData& data, const std::string& dir) {
  fs::create_directories(dir);
  write_events(data.train, (fs::path(dir) / "train.bin").string());
  write_events(data.test, (fs::path(dir) / "test.bin").string());
  write_ids(data.user_ids, (fs::path(dir) / "users.tsv").string());
  write_ids(data.item_ids, (fs::path(dir) / "items.tsv").string());
  write_levels(data.levels, data.n_items, (fs::path(dir) / "levels.bin").string());

  json manifest;
  manifest["format"] = kFormatVersion;
  manifest["seed"] = data.seed;
  manifest["n_users"] = data.n_users;
  manifest["n_items"] = data.n_items;
  manifest["n_levels"] = data.n_levels();
  manifest["n_train"] = data.train.size();
  manifest["n_test"] = data.test.size();
  manifest["dropped_test_only_items"] = data.dropped_test_only_items;
  json cold = json::array();
  for (std::uint32_t item : data.cold_items) {
    cold.push_back(data.item_ids[item]);
  }
  manifest["cold_items"] = cold;
  json cold_idx = json::array();
  for (std::uint32_t item : data.cold_items) cold_idx.push_back(item);
  manifest["cold_item_indices"] = cold_idx;

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot write manifest in '" + dir + "'");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest in '" + dir + "'");
}

PreparedData load_prepared(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "manifest.json");
  if (!in) throw IoError("cannot open manifest in '" + dir + "'");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in '" + dir + "': " + e.what());
  }

  PreparedData data;
  data.seed = manifest.at("seed").get<std::uint64_t>();
  data.n_users = manifest.at("n_users").get<Index>();
  data.n_items = manifest.at("n_items").get<Index>();
  data.dropped_test_only_items = manifest.at("dropped_test_only_items").get<std::size_t>();
  data.train = read_events((root / "train.bin").string());
  data.test = read_events((root / "test.bin").string());
  data.user_ids = read_ids((root / "users.tsv").string());
  data.item_ids = read_ids((root / "items.tsv").string());
  data.levels = read_levels(data.n_items, (root / "levels.bin").string());
  for (const auto& idx : manifest.at("cold_item_indices")) {
    data.cold_items.push_back(idx.get<std::uint32_t>());
  }
  std::sort(data.cold_items.begin(), data.cold_items.end());

  if (static_cast<Index>(data.user_ids.size()) != data.n_users ||
      static_cast<Index>(data.item_ids.size()) != data.n_items) {
    throw IoError("prepared dir '" + dir + "': id tables disagree with manifest");
  }
  const int declared_levels = manifest.at("n_levels").get<int>();
  if (declared_levels != data.n_levels()) {
    throw IoError("prepared dir '" + dir + "': level table disagrees with manifest");
  }
  return data;
}

}  // namespace hge
