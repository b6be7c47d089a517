#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hge/commands.hpp"

namespace {

// exit codes: 1 config/usage, 2 io, 3 data, 4 numeric, 5 internal
int run(int argc, char** argv) {
  CLI::App app{"Cold-start recommendation toolkit: hierarchy-aware embedding models "
               "with preparation, training, evaluation and benchmarking commands"};
  app.require_subcommand(1);

  std::string config_path;
  hge::GlobalFlags flags;
  app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  auto* seed_opt = app.add_option("--seed", flags.seed, "master seed overriding every section seed");
  app.add_option("--threads", flags.threads, "worker threads for solvers and evaluation")
      ->default_val(1);
  app.add_flag("--deterministic", flags.deterministic, "pin the run to a single thread");
  app.add_option("--out", flags.out_dir, "output directory")->default_val(".");
  app.add_flag("--tsv", flags.tsv, "print tables as TSV instead of JSON");

  auto* prepare = app.add_subcommand("prepare", "filter, split and index an interaction log");
  auto* synth = app.add_subcommand("synth", "generate a planted-hierarchy dataset");
  auto* train = app.add_subcommand("train", "train a model on prepared data");
  auto* grid = app.add_subcommand("grid", "sweep d x learning_rate on an inner validation split");
  auto* evaluate = app.add_subcommand("evaluate", "cold-start metrics for a checkpoint");
  auto* benchmark = app.add_subcommand("benchmark", "epoch-time cost of the layer stack");
  auto* exp = app.add_subcommand("export", "write item embeddings with category labels as TSV");

  std::string eval_checkpoint, export_checkpoint;
  evaluate->add_option("--checkpoint", eval_checkpoint, "model checkpoint to evaluate")
      ->required();
  exp->add_option("--checkpoint", export_checkpoint, "model checkpoint to export")->required();

  // global flags are accepted on either side of the subcommand name
  for (auto* sc : {prepare, synth, train, grid, evaluate, benchmark, exp}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 1;
  }
  flags.seed_set = seed_opt->count() > 0;

  try {
    hge::RunConfig config =
        config_path.empty() ? hge::RunConfig{} : hge::load_run_config(config_path);
    if (prepare->parsed()) {
      hge::cmd_prepare(std::move(config), flags);
    } else if (synth->parsed()) {
      hge::cmd_synth(std::move(config), flags);
    } else if (train->parsed()) {
      hge::cmd_train(std::move(config), flags);
    } else if (grid->parsed()) {
      hge::cmd_grid(std::move(config), flags);
    } else if (evaluate->parsed()) {
      hge::cmd_evaluate(std::move(config), flags, eval_checkpoint);
    } else if (benchmark->parsed()) {
      hge::cmd_benchmark(std::move(config), flags);
    } else if (exp->parsed()) {
      hge::cmd_export(std::move(config), flags, export_checkpoint);
    }
    return 0;
  } catch (const hge::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 1;
  } catch (const hge::IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return 2;
  } catch (const hge::DataError& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 3;
  } catch (const hge::NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 5;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
