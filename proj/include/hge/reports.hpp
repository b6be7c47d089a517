#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "hge/bench.hpp"
#include "hge/eval.hpp"
#include "hge/train.hpp"

namespace hge {

// JSON renderings (stable key order; these are the on-disk report formats)
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const ClusterReport& r);
nlohmann::json to_json(const TimingReport& r);
nlohmann::json to_json(const GridSearchResult& r);

// Flat tab-separated renderings of the same tables, for --tsv output
std::string to_tsv(const EvalReport& r);
std::string to_tsv(const ClusterReport& r);
std::string to_tsv(const TimingReport& r);
std::string to_tsv(const GridSearchResult& r);

}  // namespace hge
