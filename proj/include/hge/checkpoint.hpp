#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "hge/train.hpp"

namespace hge {

// Single-file binary snapshot of a trained model. Parameters are stored as
// raw little-endian f32 blocks in a fixed declared order, so save -> load is
// bit-exact; the file also carries the resolved run configuration and the
// training loss history for provenance.
void save_checkpoint(const TrainedModel& m, const std::string& path,
                     const nlohmann::json& config_echo = nlohmann::json::object());

// Rejects files with the wrong magic, an unknown version, an unknown model
// kind, or truncated blocks.
TrainedModel load_checkpoint(const std::string& path,
                             nlohmann::json* config_echo = nullptr);

// For callers that can only continue with one specific family: throws
// DataError naming both kinds when the snapshot holds something else.
void require_kind(const TrainedModel& m, ModelKind expected);

}  // namespace hge
