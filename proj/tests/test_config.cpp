#include <doctest/doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hge/checkpoint.hpp"
#include "hge/config.hpp"
#include "hge/reports.hpp"
#include "test_util.hpp"

using namespace hge;
using nlohmann::json;

namespace {

// One small model per family, every optional knob set off-default so the
// round trip has something to lose.
TrainedModel sample_model(ModelKind kind) {
  TrainedModel m;
  m.kind = kind;
  m.n_users = 3;
  m.n_items = 4;
  m.loss_history = {0.9, 0.5, 0.4};
  switch (kind) {
    case ModelKind::Random:
      break;
    case ModelKind::Mf:
      m.mf.user_embeddings = MatF::Random(3, 2);
      m.mf.item_embeddings = MatF::Random(4, 2);
      break;
    case ModelKind::Als:
      m.als.x = MatF::Random(3, 2);
      m.als.y = MatF::Random(4, 2);
      m.als.lambda_x = 0.3f;
      m.als.lambda_y = 0.7f;
      m.als.alpha = 12.0f;
      break;
    case ModelKind::Hybrid:
      m.hybrid.user_embeddings = MatF::Random(3, 2);
      m.hybrid.item_embeddings = MatF::Random(4, 2);
      m.hybrid.feature_embeddings = MatF::Random(3, 2);
      m.hybrid.user_bias = VecF::Random(3);
      m.hybrid.item_bias = VecF::Random(4);
      // one feature per hierarchy level, so the lists share a length
      m.hybrid.item_features = {{0, 1}, {1, 2}, {0, 2}, {1, 0}};
      break;
    case ModelKind::Hge: {
      m.hge.base.user_embeddings = MatF::Random(3, 2);
      m.hge.base.item_embeddings = MatF::Random(4, 2);
      HgeLayerT<float> layer;
      layer.level = 2;  // deliberately not 1
      layer.incidence = SparseIncidence(4, {0, 0, 1, 1});
      layer.w1 = MatF::Random(2, 3);
      layer.w2 = MatF::Random(4, 3);
      layer.skip = false;
      layer.masked_softmax = false;
      layer.activation = Activation::LeakyRelu;
      layer.leaky_alpha = 0.2f;
      m.hge.layers.push_back(std::move(layer));
      break;
    }
  }
  return m;
}

void corrupt_byte(const std::filesystem::path& src, const std::filesystem::path& dst,
                  std::size_t offset, char value) {
  std::string bytes = testutil::read_file(src);
  REQUIRE(offset < bytes.size());
  bytes[offset] = value;
  std::ofstream os(dst, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void truncate_to(const std::filesystem::path& src, const std::filesystem::path& dst,
                 std::size_t keep) {
  std::string bytes = testutil::read_file(src);
  REQUIRE(keep <= bytes.size());
  std::ofstream os(dst, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), static_cast<std::streamsize>(keep));
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("config: empty object yields the documented defaults") {
  const RunConfig c = run_config_from_json(json::object());
  CHECK(c.model.kind == "hge");
  CHECK(c.model.d == 32);
  CHECK(c.model.h == 32);
  CHECK(c.model.skip);
  CHECK(c.model.masked_softmax);
  CHECK(c.train.epochs == 30);
  CHECK(c.train.batch_size == 1024);
  CHECK(c.train.negatives_per_positive == 4);
  CHECK(c.train.optimizer == "adam");
  CHECK(c.train.loss == "bce");
  CHECK(c.train.sampling == "log");
  CHECK(c.split.test_window_days == 14);
  CHECK(c.split.cold_fraction == 0.2);
  CHECK(c.split.downsample == 0.01);
  CHECK(c.eval.ks == std::vector<int>{10, 20});
  CHECK(c.eval.candidates == "cold");
  CHECK(c.grid.d_grid == std::vector<int>{16, 32, 64});
  CHECK(c.grid.validation_window_days == 14);
  CHECK(c.benchmark.d_values.size() == 10);
  CHECK(c.benchmark.d_values.front() == 20);
  CHECK(c.benchmark.d_values.back() == 200);
  CHECK(c.data.binarize_threshold == 3.0);
  CHECK(c.data.k_core == 5);
  CHECK(c.data.min_category_items == 150);
}

TEST_CASE("config: explicit values land in their fields") {
  const json j{{"model", {{"kind", "mf"}, {"d", 16}, {"activation", "leaky_relu"}}},
               {"train", {{"learning_rate", 0.1}, {"optimizer", "sgd"}, {"loss", "bpr"}}},
               {"split", {{"cold_fraction", 0.5}, {"seed", 77}}},
               {"eval", {{"ks", {1, 5}}, {"candidates", "all"}}},
               {"synth", {{"branching", {3, 2}}}}};
  const RunConfig c = run_config_from_json(j);
  CHECK(c.model.kind == "mf");
  CHECK(c.model.d == 16);
  CHECK(c.model.activation == "leaky_relu");
  CHECK(c.train.learning_rate == 0.1);
  CHECK(c.train.optimizer == "sgd");
  CHECK(c.train.loss == "bpr");
  CHECK(c.split.cold_fraction == 0.5);
  CHECK(c.split.seed == 77);
  CHECK(c.eval.ks == std::vector<int>{1, 5});
  CHECK(c.eval.candidates == "all");
  CHECK(c.synth.branching == std::vector<int>{3, 2});
  // untouched sections keep defaults
  CHECK(c.benchmark.batch_size == 4096);
}

TEST_CASE("config: unknown keys are named with their full path") {
  const std::string msg = testutil::message_of<ConfigError>(
      [] { run_config_from_json(json{{"train", {{"learning_rat", 0.1}}}}); });
  CHECK(testutil::contains(msg, "unknown key"));
  CHECK(testutil::contains(msg, "train.learning_rat"));

  const std::string top = testutil::message_of<ConfigError>(
      [] { run_config_from_json(json{{"trian", json::object()}}); });
  CHECK(testutil::contains(top, "trian"));
}

TEST_CASE("config: wrong types are named with key and expectation") {
  const std::string msg = testutil::message_of<ConfigError>(
      [] { run_config_from_json(json{{"train", {{"epochs", "many"}}}}); });
  CHECK(testutil::contains(msg, "train.epochs"));
  CHECK(testutil::contains(msg, "integer"));
  CHECK(testutil::contains(msg, "string"));

  const std::string arr = testutil::message_of<ConfigError>(
      [] { run_config_from_json(json{{"eval", {{"ks", 10}}}}); });
  CHECK(testutil::contains(arr, "eval.ks"));
  CHECK(testutil::contains(arr, "array"));

  const std::string sec = testutil::message_of<ConfigError>(
      [] { run_config_from_json(json{{"train", 5}}); });
  CHECK(testutil::contains(sec, "train"));
  CHECK(testutil::contains(sec, "object"));

  CHECK_THROWS_AS(run_config_from_json(json::array({1, 2})), ConfigError);
}

TEST_CASE("config: file loading distinguishes io from syntax errors") {
  testutil::TempDir dir("cfg");
  CHECK_THROWS_AS(load_run_config(dir.file("missing.json")), IoError);

  const auto bad = dir.file("bad.json");
  std::ofstream(bad) << "{ not json";
  const std::string msg =
      testutil::message_of<ConfigError>([&] { load_run_config(bad); });
  CHECK(testutil::contains(msg, "not valid JSON"));

  const auto good = dir.file("good.json");
  std::ofstream(good) << R"({"model": {"d": 12}})";
  CHECK(load_run_config(good).model.d == 12);
}

TEST_CASE("config: the resolved echo is complete and re-parseable") {
  const RunConfig defaults = run_config_from_json(json::object());
  const json echo = resolved_config(defaults);
  for (const char* section :
       {"data", "split", "model", "train", "eval", "synth", "grid", "benchmark"}) {
    CHECK(echo.contains(section));
  }
  CHECK(echo["model"]["d"] == 32);
  CHECK(echo["eval"]["candidates"] == "cold");
  CHECK(echo["benchmark"]["d_values"].size() == 10);

  // strict parsing accepts its own echo and reproduces it exactly
  const RunConfig round = run_config_from_json(echo);
  CHECK(resolved_config(round) == echo);
}

TEST_CASE("config: one master seed overrides every section seed") {
  RunConfig c = run_config_from_json(json::object());
  override_seeds(c, 123);
  CHECK(c.split.seed == 123);
  CHECK(c.train.seed == 123);
  CHECK(c.eval.seed == 123);
  CHECK(c.synth.seed == 123);
  CHECK(c.benchmark.seed == 123);
}

TEST_CASE("config: section-to-module converters validate names") {
  RunConfig c = run_config_from_json(json::object());
  const TrainConfig t = make_train_config(c);
  CHECK(t.d == 32);
  CHECK(t.optimizer == OptimizerKind::Adam);
  CHECK(t.loss == LossKind::Bce);
  CHECK(t.sampling_mode == SamplingMode::LogProportional);
  CHECK(t.activation == Activation::Relu);

  c.train.optimizer = "sgdd";
  CHECK(testutil::contains(
      testutil::message_of<ConfigError>([&] { make_train_config(c); }), "train.optimizer"));
  c.train.optimizer = "sgd";
  c.train.loss = "hinge";
  CHECK(testutil::contains(testutil::message_of<ConfigError>([&] { make_train_config(c); }),
                           "train.loss"));
  c.train.loss = "bpr";
  c.train.sampling = "stratifiedd";
  CHECK(testutil::contains(testutil::message_of<ConfigError>([&] { make_train_config(c); }),
                           "train.sampling"));
  c.train.sampling = "uniform";
  c.model.activation = "gelu";
  CHECK(testutil::contains(testutil::message_of<ConfigError>([&] { make_train_config(c); }),
                           "model.activation"));
  c.model.activation = "leaky_relu";
  CHECK(make_train_config(c).activation == Activation::LeakyRelu);

  c.model.kind = "hgee";
  CHECK_THROWS_AS(make_model_kind(c), ConfigError);
  c.model.kind = "als";
  CHECK(make_model_kind(c) == ModelKind::Als);
  const AlsParams ap = make_als_params(c);
  CHECK(ap.alpha == 40.0f);

  c.eval.candidates = "some";
  CHECK(testutil::contains(testutil::message_of<ConfigError>([&] { make_candidate_mode(c); }),
                           "eval.candidates"));
  c.eval.candidates = "all";
  CHECK(make_candidate_mode(c) == CandidateMode::AllItems);

  const SplitParams sp = make_split_params(c);
  CHECK(sp.test_window_days == 14);
  const SynthParams syp = make_synth_params(c);
  CHECK(syp.n_items == 1000);
}

TEST_CASE("checkpoint: every model family round trips bit-exactly") {
  testutil::TempDir dir("ckpt");
  const json echo{{"note", "run-settings"}, {"train", {{"epochs", 3}}}};
  for (const ModelKind kind : {ModelKind::Random, ModelKind::Mf, ModelKind::Als,
                               ModelKind::Hybrid, ModelKind::Hge}) {
    const TrainedModel m = sample_model(kind);
    const auto p1 = dir.file(model_kind_name(kind) + "_1.bin");
    const auto p2 = dir.file(model_kind_name(kind) + "_2.bin");
    save_checkpoint(m, p1, echo);

    json echo_back;
    const TrainedModel loaded = load_checkpoint(p1, &echo_back);
    CHECK(echo_back == echo);
    CHECK(loaded.kind == kind);
    CHECK(loaded.n_users == m.n_users);
    CHECK(loaded.n_items == m.n_items);
    CHECK(loaded.loss_history == m.loss_history);

    // a second save of the loaded model must reproduce the file byte for byte
    save_checkpoint(loaded, p2, echo_back);
    CHECK(testutil::read_file(p1) == testutil::read_file(p2));
  }
}

TEST_CASE("checkpoint: layered fields survive the trip") {
  testutil::TempDir dir("ckpt_hge");
  const TrainedModel m = sample_model(ModelKind::Hge);
  const auto p = dir.file("m.bin");
  save_checkpoint(m, p);
  const TrainedModel r = load_checkpoint(p);
  REQUIRE(r.hge.layers.size() == 1);
  const auto& a = m.hge.layers[0];
  const auto& b = r.hge.layers[0];
  CHECK(b.level == a.level);
  CHECK(b.skip == a.skip);
  CHECK(b.masked_softmax == a.masked_softmax);
  CHECK(b.activation == a.activation);
  CHECK(b.leaky_alpha == a.leaky_alpha);
  CHECK((b.w1 - a.w1).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((b.w2 - a.w2).cwiseAbs().maxCoeff() == 0.0f);
  CHECK(b.incidence.category_of_all() == a.incidence.category_of_all());
  CHECK((r.hge.base.user_embeddings - m.hge.base.user_embeddings).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((r.hge.base.item_embeddings - m.hge.base.item_embeddings).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("checkpoint: truncation names the missing section and byte counts") {
  testutil::TempDir dir("ckpt_trunc");
  const auto full = dir.file("full.bin");
  save_checkpoint(sample_model(ModelKind::Hge), full);
  const std::size_t size = testutil::read_file(full).size();

  // inside the version word: the error reports expected vs actual bytes
  const auto at6 = dir.file("at6.bin");
  truncate_to(full, at6, 6);
  const std::string vmsg =
      testutil::message_of<IoError>([&] { load_checkpoint(at6); });
  CHECK(testutil::contains(vmsg, "truncated"));
  CHECK(testutil::contains(vmsg, "expected 4 bytes, got 2"));

  // a spread of cut points all fail loudly rather than half-loading
  for (const std::size_t keep :
       {std::size_t{0}, std::size_t{2}, std::size_t{9}, std::size_t{20}, size / 2, size - 3}) {
    const auto cut = dir.file("cut_" + std::to_string(keep) + ".bin");
    truncate_to(full, cut, keep);
    CHECK_THROWS_AS(load_checkpoint(cut), IoError);
  }

  CHECK_THROWS_AS(load_checkpoint(dir.file("nope.bin")), IoError);
}

TEST_CASE("checkpoint: corrupt headers are rejected by name") {
  testutil::TempDir dir("ckpt_hdr");
  const auto full = dir.file("full.bin");
  save_checkpoint(sample_model(ModelKind::Mf), full);

  const auto magic = dir.file("magic.bin");
  corrupt_byte(full, magic, 0, 'X');
  CHECK(testutil::contains(
      testutil::message_of<IoError>([&] { load_checkpoint(magic); }), "magic"));

  const auto version = dir.file("version.bin");
  corrupt_byte(full, version, 4, 9);  // little-endian low byte -> version 9
  CHECK(testutil::contains(
      testutil::message_of<IoError>([&] { load_checkpoint(version); }),
      "unsupported version 9"));

  const auto kind = dir.file("kind.bin");
  corrupt_byte(full, kind, 8, 7);
  CHECK(testutil::contains(
      testutil::message_of<DataError>([&] { load_checkpoint(kind); }),
      "unknown model kind code 7"));
}

TEST_CASE("checkpoint: kind guard names what it found and what was wanted") {
  const TrainedModel m = sample_model(ModelKind::Mf);
  CHECK_NOTHROW(require_kind(m, ModelKind::Mf));
  const std::string msg =
      testutil::message_of<DataError>([&] { require_kind(m, ModelKind::Hge); });
  CHECK(testutil::contains(msg, "'mf'"));
  CHECK(testutil::contains(msg, "'hge'"));
}

TEST_CASE("reports: json rendering carries every field") {
  EvalReport er;
  er.metrics = {{10, 0.25, 0.125}, {20, 0.5, 0.0625}};
  er.n_eval_users = 40;
  er.n_cold_items = 12;
  er.short_pool_users = 3;
  er.candidates = CandidateMode::AllItems;
  er.seed = 9;
  const json je = to_json(er);
  CHECK(je["metrics"].size() == 2);
  CHECK(je["metrics"][0]["k"] == 10);
  CHECK(je["metrics"][0]["hit_rate"] == 0.25);
  CHECK(je["metrics"][1]["precision"] == 0.0625);
  CHECK(je["n_eval_users"] == 40);
  CHECK(je["n_cold_items"] == 12);
  CHECK(je["short_pool_users"] == 3);
  CHECK(je["candidates"] == "all");
  CHECK(je["seed"] == 9);

  ClusterReport cr;
  cr.levels = {{1, 0.8, 0.2, 0.6, 100, 200, true}};
  cr.seed = 5;
  const json jc = to_json(cr);
  CHECK(jc["levels"][0]["separation"] == 0.6);
  CHECK(jc["levels"][0]["exact"] == true);

  GridSearchResult gr;
  gr.table = {{16, 0.01, 0.3}, {32, 0.01, 0.4}};
  gr.best.d = 32;
  gr.best.learning_rate = 0.01f;
  gr.k = 10;
  gr.warnings = {"w"};
  const json jg = to_json(gr);
  CHECK(jg["table"].size() == 2);
  CHECK(jg["best"]["d"] == 32);
  CHECK(jg["warnings"].size() == 1);
}

TEST_CASE("reports: tsv rendering has a header and one row per entry") {
  EvalReport er;
  er.metrics = {{10, 0.25, 0.125}, {20, 0.5, 0.0625}};
  const std::string tsv = to_tsv(er);
  CHECK(testutil::contains(tsv, "k\thit_rate\tprecision\n"));
  CHECK(testutil::contains(tsv, "10\t0.25\t0.125\n"));
  CHECK(testutil::contains(tsv, "20\t0.5\t0.0625\n"));

  ClusterReport cr;
  cr.levels = {{2, 0.75, 0.25, 0.5, 10, 20, false}};
  const std::string ctsv = to_tsv(cr);
  CHECK(testutil::contains(ctsv, "level\tintra\tinter\tseparation\tintra_pairs\tinter_pairs\texact\n"));
  CHECK(testutil::contains(ctsv, "2\t0.75\t0.25\t0.5\t10\t20\t0\n"));

  TimingReport tr;
  tr.rows = {{20, 1.0, 1.2, 1.2}};
  const std::string ttsv = to_tsv(tr);
  CHECK(testutil::contains(ttsv, "d\tbase_epoch_seconds\tlayered_epoch_seconds\tratio\n"));
  CHECK(testutil::contains(ttsv, "20\t1\t1.2\t1.2\n"));
}

}  // TEST_SUITE
