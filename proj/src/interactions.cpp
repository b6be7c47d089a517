#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hge/data.hpp"

namespace hge {

IdIndex IdIndex::from_ids(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  IdIndex out;
  out.ids_ = std::move(ids);
  out.to_index_.reserve(out.ids_.size());
  for (std::size_t i = 0; i < out.ids_.size(); ++i) {
    out.to_index_.emplace(out.ids_[i], static_cast<Index>(i));
  }
  return out;
}

namespace {

// splits one CSV line; ids are not allowed to contain commas, so a plain
// scan is enough
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

bool parse_f32(const std::string& s, float& out) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) return false;
    out = static_cast<float>(v);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

InteractionLog load_interactions(const std::string& path, bool skip_bad_rows,
                                 std::size_t* skipped) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open interactions file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("interactions file '" + path + "' is empty");
  const auto header = split_csv(strip_cr(line));
  const std::vector<std::string> expected = {"user_id", "item_id", "timestamp", "value"};
  if (header != expected) {
    throw DataError("interactions file '" + path +
                    "': header must be 'user_id,item_id,timestamp,value'");
  }

  InteractionLog log;
  std::size_t bad = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = strip_cr(line);
    if (row.empty()) continue;
    const auto fields = split_csv(row);
    Event ev;
    bool ok = fields.size() == 4 && !fields[0].empty() && !fields[1].empty() &&
              parse_i64(fields[2], ev.timestamp) && parse_f32(fields[3], ev.value) &&
              ev.timestamp >= 0;
    if (!ok) {
      if (!skip_bad_rows) {
        throw DataError("interactions file '" + path + "': malformed row at line " +
                        std::to_string(line_no));
      }
      ++bad;
      continue;
    }
    ev.user_id = fields[0];
    ev.item_id = fields[1];
    log.events.push_back(std::move(ev));
  }
  if (skipped) *skipped = bad;
  if (log.events.empty()) {
    throw EmptyDataError("interactions file '" + path + "' has no usable rows");
  }
  return log;
}

Hierarchy load_hierarchy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hierarchy file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("hierarchy file '" + path + "' is empty");
  const auto header = split_csv(strip_cr(line));
  if (header.size() < 2 || header[0] != "item_id") {
    throw DataError("hierarchy file '" + path + "': header must be 'item_id,level_1,...'");
  }
  const int n_levels = static_cast<int>(header.size()) - 1;
  for (int l = 1; l <= n_levels; ++l) {
    if (header[static_cast<std::size_t>(l)] != "level_" + std::to_string(l)) {
      throw DataError("hierarchy file '" + path + "': column " + std::to_string(l + 1) +
                      " must be 'level_" + std::to_string(l) + "'");
    }
  }

  Hierarchy h;
  h.n_levels = n_levels;
  h.assignment.resize(static_cast<std::size_t>(n_levels));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = strip_cr(line);
    if (row.empty()) continue;
    const auto fields = split_csv(row);
    if (fields.size() != header.size() || fields[0].empty()) {
      throw DataError("hierarchy file '" + path + "': malformed row at line " +
                      std::to_string(line_no));
    }
    for (int l = 0; l < n_levels; ++l) {
      const std::string& label = fields[static_cast<std::size_t>(l + 1)];
      if (label.empty()) {
        throw DataError("hierarchy file '" + path + "': empty category at line " +
                        std::to_string(line_no));
      }
      auto [it, inserted] = h.assignment[static_cast<std::size_t>(l)].emplace(fields[0], label);
      (void)it;
      if (!inserted) {
        throw DataError("hierarchy file '" + path + "': duplicate item '" + fields[0] +
                        "' at line " + std::to_string(line_no));
      }
    }
  }
  if (h.assignment[0].empty()) {
    throw EmptyDataError("hierarchy file '" + path + "' has no rows");
  }
  return h;
}

void save_interactions(const InteractionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write interactions file '" + path + "'");
  out << "user_id,item_id,timestamp,value\n";
  char buf[64];
  for (const Event& ev : log.events) {
    std::snprintf(buf, sizeof(buf), "%.6g", static_cast<double>(ev.value));
    out << ev.user_id << ',' << ev.item_id << ',' << ev.timestamp << ',' << buf << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void save_hierarchy(const Hierarchy& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write hierarchy file '" + path + "'");
  out << "item_id";
  for (int l = 1; l <= h.n_levels; ++l) out << ",level_" << l;
  out << '\n';
  // rows sorted by item id so output does not depend on map order
  std::vector<std::string> items;
  items.reserve(h.assignment[0].size());
  for (const auto& [item, label] : h.assignment[0]) {
    (void)label;
    items.push_back(item);
  }
  std::sort(items.begin(), items.end());
  for (const std::string& item : items) {
    out << item;
    for (int l = 1; l <= h.n_levels; ++l) {
      out << ',' << h.level(l).at(item);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace hge
