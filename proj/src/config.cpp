#include "hge/config.hpp"

#include <fstream>
#include <set>

namespace hge {

namespace {

const char* type_name(const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::null: return "null";
    case nlohmann::json::value_t::object: return "object";
    case nlohmann::json::value_t::array: return "array";
    case nlohmann::json::value_t::string: return "string";
    case nlohmann::json::value_t::boolean: return "boolean";
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
    case nlohmann::json::value_t::number_float: return "number";
    default: return "unknown";
  }
}

// Strict view over one JSON object: every key must be consumed by a typed
// getter, and finish() names the first leftover.
class StrictObject {
 public:
  // owns its view: sections are handed over by value
  StrictObject(nlohmann::json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) {
      if (path_.empty()) {
        throw ConfigError("config: the top level must be a JSON object, got " + std::string(type_name(j_)));
      }
      throw ConfigError("config: '" + path_ + "' must be an object, got " + type_name(j_));
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  void number(const char* key, T& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) wrong_type(key, "number", v);
    out = v.get<T>();
  }

  void integer(const char* key, int& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) wrong_type(key, "integer", v);
    out = v.get<int>();
  }

  void uinteger(const char* key, std::uint64_t& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!(v.is_number_integer() && v.get<std::int64_t>() >= 0) && !v.is_number_unsigned()) {
      wrong_type(key, "non-negative integer", v);
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) wrong_type(key, "boolean", v);
    out = v.get<bool>();
  }

  void string(const char* key, std::string& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) wrong_type(key, "string", v);
    out = v.get<std::string>();
  }

  void int_array(const char* key, std::vector<int>& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) wrong_type(key, "array of integers", v);
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer() && !e.is_number_unsigned()) {
        wrong_type(key, "array of integers", e);
      }
      out.push_back(e.get<int>());
    }
  }

  void number_array(const char* key, std::vector<double>& out) {
    if (!mark(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) wrong_type(key, "array of numbers", v);
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) wrong_type(key, "array of numbers", e);
      out.push_back(e.get<double>());
    }
  }

  nlohmann::json section(const char* key) {
    if (!mark(key)) return nlohmann::json::object();
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!consumed_.count(it.key())) {
        throw ConfigError("config: unknown key '" + join(it.key()) + "'");
      }
    }
  }

 private:
  bool mark(const char* key) {
    consumed_.insert(key);
    return j_.contains(key);
  }

  [[noreturn]] void wrong_type(const char* key, const char* expected,
                               const nlohmann::json& v) const {
    throw ConfigError("config: '" + join(key) + "' must be a " + expected + ", got " +
                      type_name(v));
  }

  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  nlohmann::json j_;
  std::string path_;
  std::set<std::string> consumed_;
};

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  StrictObject root(j, "");

  {
    StrictObject s(root.section("data"), "data");
    s.string("interactions", c.data.interactions);
    s.string("hierarchy", c.data.hierarchy);
    s.string("prepared_dir", c.data.prepared_dir);
    s.number("binarize_threshold", c.data.binarize_threshold);
    s.integer("k_core", c.data.k_core);
    s.integer("min_category_items", c.data.min_category_items);
    s.finish();
  }
  {
    StrictObject s(root.section("split"), "split");
    s.integer("test_window_days", c.split.test_window_days);
    s.number("cold_fraction", c.split.cold_fraction);
    s.number("downsample", c.split.downsample);
    s.uinteger("seed", c.split.seed);
    s.finish();
  }
  {
    StrictObject s(root.section("model"), "model");
    s.string("kind", c.model.kind);
    s.integer("d", c.model.d);
    s.integer("h", c.model.h);
    s.int_array("levels", c.model.levels);
    s.boolean("skip", c.model.skip);
    s.boolean("masked_softmax", c.model.masked_softmax);
    s.string("activation", c.model.activation);
    s.number("leaky_alpha", c.model.leaky_alpha);
    s.number("als_lambda_x", c.model.als_lambda_x);
    s.number("als_lambda_y", c.model.als_lambda_y);
    s.number("als_alpha", c.model.als_alpha);
    s.integer("als_iterations", c.model.als_iterations);
    s.finish();
  }
  {
    StrictObject s(root.section("train"), "train");
    s.number("learning_rate", c.train.learning_rate);
    s.integer("epochs", c.train.epochs);
    s.integer("batch_size", c.train.batch_size);
    s.integer("negatives_per_positive", c.train.negatives_per_positive);
    s.number("l2_user", c.train.l2_user);
    s.number("l2_item", c.train.l2_item);
    s.number("l2_layer", c.train.l2_layer);
    s.string("optimizer", c.train.optimizer);
    s.string("loss", c.train.loss);
    s.string("sampling", c.train.sampling);
    s.integer("stratify_level", c.train.stratify_level);
    s.uinteger("seed", c.train.seed);
    s.finish();
  }
  {
    StrictObject s(root.section("eval"), "eval");
    s.int_array("ks", c.eval.ks);
    s.string("candidates", c.eval.candidates);
    s.uinteger("seed", c.eval.seed);
    s.uinteger("cluster_pairs", c.eval.cluster_pairs);
    s.finish();
  }
  {
    StrictObject s(root.section("synth"), "synth");
    s.integer("n_users", c.synth.n_users);
    s.integer("n_items", c.synth.n_items);
    s.integer("n_levels", c.synth.n_levels);
    s.int_array("branching", c.synth.branching);
    s.integer("d_true", c.synth.d_true);
    s.number("noise", c.synth.noise);
    s.integer("interactions_per_user", c.synth.interactions_per_user);
    s.integer("span_days", c.synth.span_days);
    s.number("temperature", c.synth.temperature);
    s.uinteger("seed", c.synth.seed);
    s.finish();
  }
  {
    StrictObject s(root.section("grid"), "grid");
    s.int_array("d_grid", c.grid.d_grid);
    s.number_array("lr_grid", c.grid.lr_grid);
    s.integer("k", c.grid.k);
    s.integer("validation_window_days", c.grid.validation_window_days);
    s.finish();
  }
  {
    StrictObject s(root.section("benchmark"), "benchmark");
    s.int_array("d_values", c.benchmark.d_values);
    s.integer("batch_size", c.benchmark.batch_size);
    s.integer("h", c.benchmark.h);
    s.integer("warmup_epochs", c.benchmark.warmup_epochs);
    s.integer("timed_epochs", c.benchmark.timed_epochs);
    s.uinteger("seed", c.benchmark.seed);
    s.finish();
  }
  root.finish();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

nlohmann::json resolved_config(const RunConfig& c) {
  nlohmann::json j;
  j["data"] = {{"interactions", c.data.interactions},
               {"hierarchy", c.data.hierarchy},
               {"prepared_dir", c.data.prepared_dir},
               {"binarize_threshold", c.data.binarize_threshold},
               {"k_core", c.data.k_core},
               {"min_category_items", c.data.min_category_items}};
  j["split"] = {{"test_window_days", c.split.test_window_days},
                {"cold_fraction", c.split.cold_fraction},
                {"downsample", c.split.downsample},
                {"seed", c.split.seed}};
  j["model"] = {{"kind", c.model.kind},
                {"d", c.model.d},
                {"h", c.model.h},
                {"levels", c.model.levels},
                {"skip", c.model.skip},
                {"masked_softmax", c.model.masked_softmax},
                {"activation", c.model.activation},
                {"leaky_alpha", c.model.leaky_alpha},
                {"als_lambda_x", c.model.als_lambda_x},
                {"als_lambda_y", c.model.als_lambda_y},
                {"als_alpha", c.model.als_alpha},
                {"als_iterations", c.model.als_iterations}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"negatives_per_positive", c.train.negatives_per_positive},
                {"l2_user", c.train.l2_user},
                {"l2_item", c.train.l2_item},
                {"l2_layer", c.train.l2_layer},
                {"optimizer", c.train.optimizer},
                {"loss", c.train.loss},
                {"sampling", c.train.sampling},
                {"stratify_level", c.train.stratify_level},
                {"seed", c.train.seed}};
  j["eval"] = {{"ks", c.eval.ks},
               {"candidates", c.eval.candidates},
               {"seed", c.eval.seed},
               {"cluster_pairs", c.eval.cluster_pairs}};
  j["synth"] = {{"n_users", c.synth.n_users},
                {"n_items", c.synth.n_items},
                {"n_levels", c.synth.n_levels},
                {"branching", c.synth.branching},
                {"d_true", c.synth.d_true},
                {"noise", c.synth.noise},
                {"interactions_per_user", c.synth.interactions_per_user},
                {"span_days", c.synth.span_days},
                {"temperature", c.synth.temperature},
                {"seed", c.synth.seed}};
  j["grid"] = {{"d_grid", c.grid.d_grid},
               {"lr_grid", c.grid.lr_grid},
               {"k", c.grid.k},
               {"validation_window_days", c.grid.validation_window_days}};
  j["benchmark"] = {{"d_values", c.benchmark.d_values},
                    {"batch_size", c.benchmark.batch_size},
                    {"h", c.benchmark.h},
                    {"warmup_epochs", c.benchmark.warmup_epochs},
                    {"timed_epochs", c.benchmark.timed_epochs},
                    {"seed", c.benchmark.seed}};
  return j;
}

void override_seeds(RunConfig& c, std::uint64_t seed) {
  c.split.seed = seed;
  c.train.seed = seed;
  c.eval.seed = seed;
  c.synth.seed = seed;
  c.benchmark.seed = seed;
}

SplitParams make_split_params(const RunConfig& c) {
  SplitParams p;
  p.test_window_days = c.split.test_window_days;
  p.cold_fraction = c.split.cold_fraction;
  p.downsample = c.split.downsample;
  return p;
}

TrainConfig make_train_config(const RunConfig& c) {
  TrainConfig t;
  t.d = c.model.d;
  t.h = c.model.h;
  t.learning_rate = static_cast<float>(c.train.learning_rate);
  t.epochs = c.train.epochs;
  t.batch_size = c.train.batch_size;
  t.negatives_per_positive = c.train.negatives_per_positive;
  t.l2_user = static_cast<float>(c.train.l2_user);
  t.l2_item = static_cast<float>(c.train.l2_item);
  t.l2_layer = static_cast<float>(c.train.l2_layer);
  if (c.train.optimizer == "sgd") {
    t.optimizer = OptimizerKind::Sgd;
  } else if (c.train.optimizer == "adam") {
    t.optimizer = OptimizerKind::Adam;
  } else {
    throw ConfigError("config: 'train.optimizer' must be \"sgd\" or \"adam\", got \"" +
                      c.train.optimizer + "\"");
  }
  if (c.train.loss == "bce") {
    t.loss = LossKind::Bce;
  } else if (c.train.loss == "bpr") {
    t.loss = LossKind::Bpr;
  } else {
    throw ConfigError("config: 'train.loss' must be \"bce\" or \"bpr\", got \"" + c.train.loss +
                      "\"");
  }
  if (c.train.sampling == "uniform") {
    t.sampling_mode = SamplingMode::Uniform;
  } else if (c.train.sampling == "log") {
    t.sampling_mode = SamplingMode::LogProportional;
  } else {
    throw ConfigError("config: 'train.sampling' must be \"uniform\" or \"log\", got \"" +
                      c.train.sampling + "\"");
  }
  t.stratify_level = c.train.stratify_level;
  t.seed = c.train.seed;
  t.levels = c.model.levels;
  t.skip = c.model.skip;
  t.masked_softmax = c.model.masked_softmax;
  if (c.model.activation == "relu") {
    t.activation = Activation::Relu;
  } else if (c.model.activation == "leaky_relu") {
    t.activation = Activation::LeakyRelu;
  } else {
    throw ConfigError("config: 'model.activation' must be \"relu\" or \"leaky_relu\", got \"" +
                      c.model.activation + "\"");
  }
  t.leaky_alpha = static_cast<float>(c.model.leaky_alpha);
  return t;
}

AlsParams make_als_params(const RunConfig& c) {
  AlsParams p;
  p.d = c.model.d;
  p.lambda_x = static_cast<float>(c.model.als_lambda_x);
  p.lambda_y = static_cast<float>(c.model.als_lambda_y);
  p.alpha = static_cast<float>(c.model.als_alpha);
  p.iterations = c.model.als_iterations;
  return p;
}

SynthParams make_synth_params(const RunConfig& c) {
  SynthParams p;
  p.n_users = c.synth.n_users;
  p.n_items = c.synth.n_items;
  p.n_levels = c.synth.n_levels;
  p.branching = c.synth.branching;
  p.d_true = c.synth.d_true;
  p.noise = c.synth.noise;
  p.interactions_per_user = c.synth.interactions_per_user;
  p.span_days = c.synth.span_days;
  p.temperature = c.synth.temperature;
  return p;
}

ModelKind make_model_kind(const RunConfig& c) {
  return model_kind_from_name(c.model.kind);
}

CandidateMode make_candidate_mode(const RunConfig& c) {
  if (c.eval.candidates == "cold") return CandidateMode::ColdOnly;
  if (c.eval.candidates == "all") return CandidateMode::AllItems;
  throw ConfigError("config: 'eval.candidates' must be \"cold\" or \"all\", got \"" +
                    c.eval.candidates + "\"");
}

}  // namespace hge
