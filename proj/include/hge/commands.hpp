#pragma once

#include <cstdint>
#include <string>

#include "hge/config.hpp"

namespace hge {

// Flags shared by every subcommand. `out_dir` receives all file outputs; a
// set master seed overrides every section seed; `deterministic` pins the run
// to one thread.
struct GlobalFlags {
  bool seed_set = false;
  std::uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;
  std::string out_dir = ".";
  bool tsv = false;
};

void cmd_prepare(RunConfig config, const GlobalFlags& flags);
void cmd_synth(RunConfig config, const GlobalFlags& flags);
void cmd_train(RunConfig config, const GlobalFlags& flags);
void cmd_grid(RunConfig config, const GlobalFlags& flags);
void cmd_evaluate(RunConfig config, const GlobalFlags& flags, const std::string& checkpoint);
void cmd_benchmark(RunConfig config, const GlobalFlags& flags);
void cmd_export(RunConfig config, const GlobalFlags& flags, const std::string& checkpoint);

}  // namespace hge
