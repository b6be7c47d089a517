#include "hge/reports.hpp"

#include <cstdio>
#include <sstream>

namespace hge {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : r.metrics) {
    metrics.push_back({{"k", m.k}, {"hit_rate", m.hit_rate}, {"precision", m.precision}});
  }
  return {{"metrics", metrics},
          {"n_eval_users", r.n_eval_users},
          {"n_cold_items", r.n_cold_items},
          {"short_pool_users", r.short_pool_users},
          {"candidates", r.candidates == CandidateMode::ColdOnly ? "cold" : "all"},
          {"seed", r.seed}};
}

nlohmann::json to_json(const ClusterReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& s : r.levels) {
    levels.push_back({{"level", s.level},
                      {"intra", s.intra},
                      {"inter", s.inter},
                      {"separation", s.separation},
                      {"intra_pairs", s.intra_pairs},
                      {"inter_pairs", s.inter_pairs},
                      {"exact", s.exact}});
  }
  return {{"levels", levels}, {"seed", r.seed}};
}

nlohmann::json to_json(const TimingReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"d", row.d},
                    {"base_epoch_seconds", row.base_epoch_seconds},
                    {"layered_epoch_seconds", row.layered_epoch_seconds},
                    {"ratio", row.ratio}});
  }
  return {{"rows", rows},
          {"warmup_epochs", r.warmup_epochs},
          {"timed_epochs", r.timed_epochs},
          {"layers", r.layers},
          {"h", r.h},
          {"batch_size", r.batch_size},
          {"hardware", r.hardware}};
}

nlohmann::json to_json(const GridSearchResult& r) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& cell : r.table) {
    table.push_back(
        {{"d", cell.d}, {"learning_rate", cell.learning_rate}, {"precision", cell.precision}});
  }
  return {{"table", table},
          {"best", {{"d", r.best.d}, {"learning_rate", r.best.learning_rate}}},
          {"k", r.k},
          {"warnings", r.warnings}};
}

std::string to_tsv(const EvalReport& r) {
  std::ostringstream os;
  os << "k\thit_rate\tprecision\n";
  for (const auto& m : r.metrics) {
    os << m.k << '\t' << num(m.hit_rate) << '\t' << num(m.precision) << '\n';
  }
  return os.str();
}

std::string to_tsv(const ClusterReport& r) {
  std::ostringstream os;
  os << "level\tintra\tinter\tseparation\tintra_pairs\tinter_pairs\texact\n";
  for (const auto& s : r.levels) {
    os << s.level << '\t' << num(s.intra) << '\t' << num(s.inter) << '\t' << num(s.separation)
       << '\t' << s.intra_pairs << '\t' << s.inter_pairs << '\t' << (s.exact ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string to_tsv(const TimingReport& r) {
  std::ostringstream os;
  os << "d\tbase_epoch_seconds\tlayered_epoch_seconds\tratio\n";
  for (const auto& row : r.rows) {
    os << row.d << '\t' << num(row.base_epoch_seconds) << '\t' << num(row.layered_epoch_seconds)
       << '\t' << num(row.ratio) << '\n';
  }
  return os.str();
}

std::string to_tsv(const GridSearchResult& r) {
  std::ostringstream os;
  os << "d\tlearning_rate\tprecision\n";
  for (const auto& cell : r.table) {
    os << cell.d << '\t' << num(cell.learning_rate) << '\t' << num(cell.precision) << '\n';
  }
  return os.str();
}

}  // namespace hge
