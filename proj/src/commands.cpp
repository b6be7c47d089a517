#include "hge/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "hge/bench.hpp"
#include "hge/checkpoint.hpp"
#include "hge/eval.hpp"
#include "hge/pipeline.hpp"
#include "hge/reports.hpp"

namespace hge {

namespace {

int effective_threads(const GlobalFlags& flags) {
  if (flags.threads < 1) throw ConfigError("--threads must be >= 1");
  return flags.deterministic ? 1 : flags.threads;
}

void apply_overrides(RunConfig& config, const GlobalFlags& flags) {
  if (flags.seed_set) override_seeds(config, flags.seed);
}

std::filesystem::path ensure_out_dir(const GlobalFlags& flags) {
  std::filesystem::path out(flags.out_dir.empty() ? "." : flags.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
  return out;
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

void write_resolved_config(const RunConfig& config, const std::filesystem::path& out) {
  write_json_file(resolved_config(config), out / "resolved_config.json");
}

PreparedData load_prepared_from_config(const RunConfig& config) {
  if (config.data.prepared_dir.empty()) {
    throw ConfigError("data.prepared_dir is not set; run `hge prepare` first and point "
                      "data.prepared_dir at its output directory");
  }
  return load_prepared(config.data.prepared_dir);
}

void emit(const GlobalFlags& flags, const nlohmann::json& j, const std::string& tsv) {
  if (flags.tsv) {
    std::cout << tsv;
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

}  // namespace

void cmd_prepare(RunConfig config, const GlobalFlags& flags) {
  apply_overrides(config, flags);
  if (config.data.interactions.empty() || config.data.hierarchy.empty()) {
    throw ConfigError("prepare needs data.interactions and data.hierarchy paths");
  }
  const auto out = ensure_out_dir(flags);

  InteractionLog log = load_interactions(config.data.interactions);
  Hierarchy hierarchy = load_hierarchy(config.data.hierarchy);
  const std::size_t raw_events = log.size();

  log = binarize(log, config.data.binarize_threshold);
  const std::size_t after_binarize = log.size();
  log = k_core_filter(log, config.data.k_core);

  ColdStartSplit split = cold_start_split(log, make_split_params(config), config.split.seed);

  // category sizes are counted over the items that survived filtering + split
  std::unordered_set<std::string> retained(split.item_index.ids().begin(),
                                           split.item_index.ids().end());
  hierarchy = restrict_hierarchy(hierarchy, retained);
  for (int level = 1; level <= hierarchy.n_levels; ++level) {
    hierarchy = merge_small_categories(hierarchy, level, config.data.min_category_items);
  }

  PreparedData data = index_split(split, hierarchy);
  write_prepared(data, out.string());
  write_resolved_config(config, out);

  nlohmann::json summary = {
      {"n_users", data.n_users},
      {"n_items", data.n_items},
      {"train_events", data.train.size()},
      {"test_events", data.test.size()},
      {"cold_items", data.cold_items.size()},
      {"dropped_test_only_items", data.dropped_test_only_items},
      {"raw_events", raw_events},
      {"events_after_binarize", after_binarize},
      {"levels", data.n_levels()},
      {"out_dir", out.string()},
  };
  std::ostringstream tsv;
  tsv << "key\tvalue\n";
  for (const auto& [k, v] : summary.items()) {
    tsv << k << '\t' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  emit(flags, summary, tsv.str());
}

void cmd_synth(RunConfig config, const GlobalFlags& flags) {
  apply_overrides(config, flags);
  const auto out = ensure_out_dir(flags);
  auto [log, hierarchy] = synth_generate(make_synth_params(config), config.synth.seed);
  const auto interactions_path = out / "interactions.csv";
  const auto hierarchy_path = out / "hierarchy.csv";
  save_interactions(log, interactions_path.string());
  save_hierarchy(hierarchy, hierarchy_path.string());
  write_resolved_config(config, out);

  nlohmann::json summary = {{"events", log.size()},
                            {"levels", hierarchy.n_levels},
                            {"interactions", interactions_path.string()},
                            {"hierarchy", hierarchy_path.string()}};
  std::ostringstream tsv;
  tsv << "key\tvalue\n";
  for (const auto& [k, v] : summary.items()) {
    tsv << k << '\t' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  emit(flags, summary, tsv.str());
}

void cmd_train(RunConfig config, const GlobalFlags& flags) {
  apply_overrides(config, flags);
  const auto out = ensure_out_dir(flags);
  const PreparedData data = load_prepared_from_config(config);

  const ModelKind kind = make_model_kind(config);
  TrainedModel model = fit(kind, data, make_train_config(config), make_als_params(config),
                           effective_threads(flags));

  const auto ckpt = out / "model.ckpt";
  save_checkpoint(model, ckpt.string(), resolved_config(config));
  write_resolved_config(config, out);

  nlohmann::json summary = {{"kind", model_kind_name(kind)},
                            {"param_count", param_count(model)},
                            {"epochs_recorded", model.loss_history.size()},
                            {"loss_history", model.loss_history},
                            {"checkpoint", ckpt.string()}};
  std::ostringstream tsv;
  tsv << "epoch\tloss\n";
  for (std::size_t e = 0; e < model.loss_history.size(); ++e) {
    tsv << (e + 1) << '\t' << model.loss_history[e] << '\n';
  }
  emit(flags, summary, tsv.str());
}

void cmd_grid(RunConfig config, const GlobalFlags& flags) {
  apply_overrides(config, flags);
  const auto out = ensure_out_dir(flags);
  const PreparedData data = load_prepared_from_config(config);

  std::vector<Index> d_grid(config.grid.d_grid.begin(), config.grid.d_grid.end());
  SplitParams inner;
  inner.test_window_days = config.grid.validation_window_days;
  inner.cold_fraction = config.split.cold_fraction;
  inner.downsample = config.split.downsample;

  GridSearchResult res =
      grid_search(make_model_kind(config), data, make_train_config(config), d_grid,
                  config.grid.lr_grid, config.grid.k, inner, effective_threads(flags));

  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  write_json_file(to_json(res), out / "grid.json");
  write_resolved_config(config, out);
  emit(flags, to_json(res), to_tsv(res));
}

void cmd_evaluate(RunConfig config, const GlobalFlags& flags, const std::string& checkpoint) {
  apply_overrides(config, flags);
  const auto out = ensure_out_dir(flags);
  const PreparedData data = load_prepared_from_config(config);
  const TrainedModel model = load_checkpoint(checkpoint);

  auto rec = make_recommender(model, config.eval.seed);
  EvalReport report = evaluate_cold(*rec, data, config.eval.ks, config.eval.seed,
                                    effective_threads(flags), make_candidate_mode(config));

  nlohmann::json j = to_json(report);
  j["kind"] = model_kind_name(model.kind);
  std::string tsv = to_tsv(report);
  if (model.kind != ModelKind::Random) {
    const ClusterReport clusters = cluster_report(effective_item_embeddings(model), data.levels,
                                                  config.eval.seed, config.eval.cluster_pairs);
    j["clusters"] = to_json(clusters);
    tsv += to_tsv(clusters);
  }

  write_json_file(j, out / "eval.json");
  write_resolved_config(config, out);
  emit(flags, j, tsv);
}

void cmd_benchmark(RunConfig config, const GlobalFlags& flags) {
  apply_overrides(config, flags);
  const auto out = ensure_out_dir(flags);
  const PreparedData data = load_prepared_from_config(config);

  TrainConfig base = make_train_config(config);
  base.h = config.benchmark.h;
  base.batch_size = config.benchmark.batch_size;
  base.seed = config.benchmark.seed;

  std::vector<Index> d_values(config.benchmark.d_values.begin(), config.benchmark.d_values.end());
  TimingReport report = timing_benchmark(data, d_values, base, config.benchmark.warmup_epochs,
                                         config.benchmark.timed_epochs);

  write_json_file(to_json(report), out / "benchmark.json");
  write_resolved_config(config, out);
  emit(flags, to_json(report), to_tsv(report));
}

void cmd_export(RunConfig config, const GlobalFlags& flags, const std::string& checkpoint) {
  apply_overrides(config, flags);
  const auto out = ensure_out_dir(flags);
  const PreparedData data = load_prepared_from_config(config);
  const TrainedModel model = load_checkpoint(checkpoint);

  const auto path = out / "embeddings.tsv";
  export_embeddings(effective_item_embeddings(model), data, path.string());
  write_resolved_config(config, out);

  nlohmann::json summary = {{"kind", model_kind_name(model.kind)},
                            {"items", data.n_items},
                            {"embeddings", path.string()}};
  emit(flags, summary, "embeddings\t" + path.string() + "\n");
}

}  // namespace hge
