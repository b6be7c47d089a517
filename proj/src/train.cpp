#include "hge/train.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hge/eval.hpp"
#include "hge/loss.hpp"
#include "hge/rng.hpp"

namespace hge {

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Random: return "random";
    case ModelKind::Mf: return "mf";
    case ModelKind::Als: return "als";
    case ModelKind::Hybrid: return "hybrid";
    case ModelKind::Hge: return "hge";
  }
  throw ConfigError("unknown model kind");
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "random") return ModelKind::Random;
  if (name == "mf") return ModelKind::Mf;
  if (name == "als") return ModelKind::Als;
  if (name == "hybrid") return ModelKind::Hybrid;
  if (name == "hge") return ModelKind::Hge;
  throw ConfigError("unknown model kind '" + name +
                    "' (expected random|mf|als|hybrid|hge)");
}

std::int64_t param_count(const TrainedModel& m) {
  switch (m.kind) {
    case ModelKind::Random: return 0;
    case ModelKind::Mf: return param_count(m.mf);
    case ModelKind::Als: return param_count(m.als);
    case ModelKind::Hybrid: return param_count(m.hybrid);
    case ModelKind::Hge: return param_count(m.hge);
  }
  throw ConfigError("unknown model kind");
}

namespace {

MatF uniform_matrix(Index rows, Index cols, double lo, double hi, Rng& rng) {
  MatF m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = static_cast<float>(rng.uniform(lo, hi));
  }
  return m;
}

void validate_common(const TrainConfig& cfg) {
  if (cfg.d < 1) throw ConfigError("train: d must be >= 1");
  // zero is allowed (a deliberate no-op run); negative or non-finite is not
  if (cfg.learning_rate < 0.0f || !std::isfinite(cfg.learning_rate)) {
    throw ConfigError("train: learning_rate must be >= 0 and finite");
  }
  if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (cfg.negatives_per_positive < 0) {
    throw ConfigError("train: negatives_per_positive must be >= 0");
  }
  if (cfg.loss == LossKind::Bpr && cfg.negatives_per_positive < 1) {
    throw ConfigError("train: the ranking loss needs negatives_per_positive >= 1");
  }
  if (cfg.l2_user < 0 || cfg.l2_item < 0 || cfg.l2_layer < 0) {
    throw ConfigError("train: l2 penalties must be >= 0");
  }
  if (!(cfg.adam_beta1 >= 0 && cfg.adam_beta1 < 1) ||
      !(cfg.adam_beta2 >= 0 && cfg.adam_beta2 < 1)) {
    throw ConfigError("train: adam betas must lie in [0, 1)");
  }
  if (!(cfg.adam_eps > 0)) throw ConfigError("train: adam_eps must be positive");
}

std::vector<int> resolve_levels(const PreparedData& data, const TrainConfig& cfg) {
  std::vector<int> levels = cfg.levels;
  if (levels.empty()) {
    for (int l = 1; l <= data.n_levels(); ++l) levels.push_back(l);
    return levels;
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] < 1 || levels[k] > data.n_levels()) {
      throw ConfigError("train: level " + std::to_string(levels[k]) + " out of range [1, " +
                        std::to_string(data.n_levels()) + "]");
    }
    if (k > 0 && levels[k] <= levels[k - 1]) {
      throw ConfigError("train: levels must be strictly increasing");
    }
  }
  return levels;
}

}  // namespace

HgeModel init_hge_model(const PreparedData& data, const TrainConfig& cfg, bool with_layers) {
  validate_common(cfg);
  HgeModel m;
  {
    Rng rng(derive_seed(cfg.seed, "init:user"));
    m.base.user_embeddings = uniform_matrix(data.n_users, cfg.d, -0.01, 0.01, rng);
  }
  {
    Rng rng(derive_seed(cfg.seed, "init:item"));
    m.base.item_embeddings = uniform_matrix(data.n_items, cfg.d, -0.01, 0.01, rng);
  }
  if (!with_layers) return m;

  if (cfg.h < 1) throw ConfigError("train: h must be >= 1");
  if (cfg.activation == Activation::LeakyRelu &&
      (!(cfg.leaky_alpha > 0.0f) || !(cfg.leaky_alpha < 1.0f))) {
    throw ConfigError("train: leaky_alpha must lie in (0, 1)");
  }
  for (int level : resolve_levels(data, cfg)) {
    const LeveledIncidence& li = data.levels[static_cast<std::size_t>(level - 1)];
    HgeLayer layer;
    layer.level = level;
    layer.incidence = li.incidence;
    {
      Rng rng(derive_seed(cfg.seed, "init:w1:" + std::to_string(level)));
      // non-negative start so every category begins with live (gated-in) scores
      layer.w1 = uniform_matrix(li.incidence.n_categories(), cfg.h, 0.0, 0.01, rng);
    }
    {
      Rng rng(derive_seed(cfg.seed, "init:w2:" + std::to_string(level)));
      layer.w2 = uniform_matrix(data.n_items, cfg.h, -0.01, 0.01, rng);
    }
    layer.activation = cfg.activation;
    layer.leaky_alpha = cfg.leaky_alpha;
    layer.skip = cfg.skip;
    layer.masked_softmax = cfg.masked_softmax;
    m.layers.push_back(std::move(layer));
  }
  validate_layer_order(m);
  return m;
}

HybridMfModel init_hybrid_model(const PreparedData& data, const TrainConfig& cfg) {
  validate_common(cfg);
  HybridMfModel m;
  {
    Rng rng(derive_seed(cfg.seed, "init:user"));
    m.user_embeddings = uniform_matrix(data.n_users, cfg.d, -0.01, 0.01, rng);
  }
  {
    Rng rng(derive_seed(cfg.seed, "init:item"));
    m.item_embeddings = uniform_matrix(data.n_items, cfg.d, -0.01, 0.01, rng);
  }
  Index n_features = 0;
  std::vector<Index> offsets;  // per level
  for (const auto& li : data.levels) {
    offsets.push_back(n_features);
    n_features += li.incidence.n_categories();
  }
  {
    Rng rng(derive_seed(cfg.seed, "init:feature"));
    m.feature_embeddings = uniform_matrix(n_features, cfg.d, -0.01, 0.01, rng);
  }
  m.user_bias = VecF::Zero(data.n_users);
  m.item_bias = VecF::Zero(data.n_items);
  m.item_features.resize(static_cast<std::size_t>(data.n_items));
  for (Index i = 0; i < data.n_items; ++i) {
    auto& feats = m.item_features[static_cast<std::size_t>(i)];
    feats.reserve(data.levels.size());
    for (std::size_t l = 0; l < data.levels.size(); ++l) {
      feats.push_back(static_cast<std::int32_t>(
          offsets[l] + data.levels[l].incidence.category_of(i)));
    }
  }
  return m;
}

RowOptimizer::RowOptimizer(Index rows, Index cols, const TrainConfig& cfg)
    : kind_(cfg.optimizer),
      lr_(static_cast<double>(cfg.learning_rate)),
      b1_(static_cast<double>(cfg.adam_beta1)),
      b2_(static_cast<double>(cfg.adam_beta2)),
      eps_(static_cast<double>(cfg.adam_eps)) {
  if (kind_ == OptimizerKind::Adam) {
    m_.setZero(rows, cols);
    v_.setZero(rows, cols);
  }
}

void RowOptimizer::apply_row(MatF& param, const MatF& grad, Index row) {
  if (kind_ == OptimizerKind::Sgd) {
    param.row(row) -= static_cast<float>(lr_) * grad.row(row);
    return;
  }
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (Index k = 0; k < param.cols(); ++k) {
    const double gk = static_cast<double>(grad(row, k));
    double mm = b1_ * static_cast<double>(m_(row, k)) + (1.0 - b1_) * gk;
    double vv = b2_ * static_cast<double>(v_(row, k)) + (1.0 - b2_) * gk * gk;
    m_(row, k) = static_cast<float>(mm);
    v_(row, k) = static_cast<float>(vv);
    param(row, k) -= static_cast<float>(lr_ * (mm / bc1) / (std::sqrt(vv / bc2) + eps_));
  }
}

void RowOptimizer::apply_scalar(VecF& param, const VecF& grad, Index row) {
  if (kind_ == OptimizerKind::Sgd) {
    param[row] -= static_cast<float>(lr_) * grad[row];
    return;
  }
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  const double gk = static_cast<double>(grad[row]);
  double mm = b1_ * static_cast<double>(m_(row, 0)) + (1.0 - b1_) * gk;
  double vv = b2_ * static_cast<double>(v_(row, 0)) + (1.0 - b2_) * gk * gk;
  m_(row, 0) = static_cast<float>(mm);
  v_(row, 0) = static_cast<float>(vv);
  param[row] -= static_cast<float>(lr_ * (mm / bc1) / (std::sqrt(vv / bc2) + eps_));
}

GdTrainer::GdTrainer(HgeModel model, TrainConfig cfg)
    : model_(std::move(model)), cfg_(std::move(cfg)) {
  opt_user_ = RowOptimizer(model_.base.n_users(), model_.base.d(), cfg_);
  opt_item_ = RowOptimizer(model_.base.n_items(), model_.base.d(), cfg_);
  for (const auto& layer : model_.layers) {
    opt_w1_.emplace_back(layer.w1.rows(), layer.w1.cols(), cfg_);
    opt_w2_.emplace_back(layer.w2.rows(), layer.w2.cols(), cfg_);
  }
  grads_.resize_like(model_);
}

double GdTrainer::run_epoch(const std::vector<Batch>& batches) {
  const int ratio = cfg_.negatives_per_positive;
  double loss_sum = 0.0;
  std::uint64_t n_elements = 0;

  std::vector<float> logits;
  std::vector<int> labels;
  std::vector<float> diffs;
  std::vector<std::tuple<Index, Index, float>> score_grads;
  HgeForwardCache<float> fc;

  for (const Batch& batch : batches) {
    if (batch.positives.empty()) continue;
    const std::size_t n_pos = batch.positives.size();
    const std::size_t n_neg = batch.negatives.size();

    MatF item_map = hge_item_embeddings(model_, &fc);

    score_grads.clear();
    double batch_loss = 0.0;
    std::uint64_t batch_elements = 0;

    if (cfg_.loss == LossKind::Bce) {
      logits.clear();
      labels.clear();
      for (const auto& [u, i] : batch.positives) {
        logits.push_back(hge_score(model_, item_map, u, i));
        labels.push_back(1);
      }
      for (const auto& [u, i] : batch.negatives) {
        logits.push_back(hge_score(model_, item_map, u, i));
        labels.push_back(0);
      }
      LossResult<float> lr = bce_with_logits(logits, labels);
      for (std::size_t k = 0; k < n_pos; ++k) {
        score_grads.emplace_back(batch.positives[k].first, batch.positives[k].second,
                                 lr.grad[k]);
      }
      for (std::size_t k = 0; k < n_neg; ++k) {
        score_grads.emplace_back(batch.negatives[k].first, batch.negatives[k].second,
                                 lr.grad[n_pos + k]);
      }
      batch_loss = lr.loss;
      batch_elements = n_pos + n_neg;
    } else {
      // each positive against its own negatives, one pair per negative
      diffs.clear();
      for (std::size_t p = 0; p < n_pos; ++p) {
        const auto& [u, i] = batch.positives[p];
        const float s_pos = hge_score(model_, item_map, u, i);
        for (int t = 0; t < ratio; ++t) {
          const auto& [nu, nj] = batch.negatives[p * static_cast<std::size_t>(ratio) +
                                                 static_cast<std::size_t>(t)];
          diffs.push_back(s_pos - hge_score(model_, item_map, nu, nj));
        }
      }
      LossResult<float> lr = bpr_from_diffs(diffs);
      std::size_t k = 0;
      for (std::size_t p = 0; p < n_pos; ++p) {
        const auto& [u, i] = batch.positives[p];
        for (int t = 0; t < ratio; ++t, ++k) {
          const auto& [nu, nj] = batch.negatives[p * static_cast<std::size_t>(ratio) +
                                                 static_cast<std::size_t>(t)];
          score_grads.emplace_back(u, i, lr.grad[k]);
          score_grads.emplace_back(nu, nj, -lr.grad[k]);
        }
      }
      batch_loss = lr.loss;
      batch_elements = diffs.size();
    }

    hge_backward(model_, fc, item_map, score_grads, grads_);

    opt_user_.begin_step();
    opt_item_.begin_step();
    for (auto& o : opt_w1_) o.begin_step();
    for (auto& o : opt_w2_) o.begin_step();

    // weight decay joins the gradient on touched rows only, then each row is
    // updated and its gradient buffer handed back zeroed
    for (Index u = 0; u < model_.base.n_users(); ++u) {
      if (!grads_.touched_users[static_cast<std::size_t>(u)]) continue;
      if (cfg_.l2_user > 0) {
        grads_.user.row(u) += 2.0f * cfg_.l2_user * model_.base.user_embeddings.row(u);
      }
      opt_user_.apply_row(model_.base.user_embeddings, grads_.user, u);
      grads_.user.row(u).setZero();
      grads_.touched_users[static_cast<std::size_t>(u)] = 0;
    }
    for (Index i = 0; i < model_.base.n_items(); ++i) {
      if (!grads_.touched_items[static_cast<std::size_t>(i)]) continue;
      if (cfg_.l2_item > 0) {
        grads_.item.row(i) += 2.0f * cfg_.l2_item * model_.base.item_embeddings.row(i);
      }
      opt_item_.apply_row(model_.base.item_embeddings, grads_.item, i);
      grads_.item.row(i).setZero();
      grads_.touched_items[static_cast<std::size_t>(i)] = 0;
    }
    for (std::size_t l = 0; l < model_.layers.size(); ++l) {
      auto& layer = model_.layers[l];
      for (Index c = 0; c < layer.w1.rows(); ++c) {
        if (!grads_.touched_w1[l][static_cast<std::size_t>(c)]) continue;
        if (cfg_.l2_layer > 0) {
          grads_.w1[l].row(c) += 2.0f * cfg_.l2_layer * layer.w1.row(c);
        }
        opt_w1_[l].apply_row(layer.w1, grads_.w1[l], c);
        grads_.w1[l].row(c).setZero();
        grads_.touched_w1[l][static_cast<std::size_t>(c)] = 0;
      }
      for (Index j = 0; j < layer.w2.rows(); ++j) {
        if (!grads_.touched_w2[l][static_cast<std::size_t>(j)]) continue;
        if (cfg_.l2_layer > 0) {
          grads_.w2[l].row(j) += 2.0f * cfg_.l2_layer * layer.w2.row(j);
        }
        opt_w2_[l].apply_row(layer.w2, grads_.w2[l], j);
        grads_.w2[l].row(j).setZero();
        grads_.touched_w2[l][static_cast<std::size_t>(j)] = 0;
      }
    }

    loss_sum += batch_loss * static_cast<double>(batch_elements);
    n_elements += batch_elements;
  }

  if (n_elements == 0) throw EmptyDataError("train: epoch produced no batches");
  return loss_sum / static_cast<double>(n_elements);
}

namespace {

TrainedModel train_gradient(ModelKind kind, const PreparedData& data, const TrainConfig& cfg) {
  GdTrainer trainer(init_hge_model(data, cfg, kind == ModelKind::Hge), cfg);
  const auto seen = data.train_items_by_user();
  BatchParams bp;
  bp.batch_size = cfg.batch_size;
  bp.mode = cfg.sampling_mode;
  bp.negatives_per_positive = cfg.negatives_per_positive;
  bp.stratify_level = cfg.stratify_level;

  TrainedModel out;
  out.kind = kind;
  out.n_users = data.n_users;
  out.n_items = data.n_items;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_epoch_batches(data, seen, bp, cfg.seed, epoch);
    const double loss = trainer.run_epoch(batches);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " +
                         std::to_string(epoch + 1) + "; reduce learning_rate (currently " +
                         std::to_string(cfg.learning_rate) + ")");
    }
    out.loss_history.push_back(loss);
  }
  HgeModel model = trainer.take_model();
  if (kind == ModelKind::Mf) {
    out.mf = std::move(model.base);
  } else {
    out.hge = std::move(model);
  }
  return out;
}

TrainedModel train_hybrid(const PreparedData& data, const TrainConfig& cfg) {
  HybridMfModel m = init_hybrid_model(data, cfg);
  const auto seen = data.train_items_by_user();
  BatchParams bp;
  bp.batch_size = cfg.batch_size;
  bp.mode = cfg.sampling_mode;
  bp.negatives_per_positive = cfg.negatives_per_positive;
  bp.stratify_level = cfg.stratify_level;

  RowOptimizer opt_user(m.n_users(), cfg.d, cfg);
  RowOptimizer opt_item(m.n_items(), cfg.d, cfg);
  RowOptimizer opt_feat(m.n_features(), cfg.d, cfg);
  RowOptimizer opt_ub(m.n_users(), 1, cfg);
  RowOptimizer opt_ib(m.n_items(), 1, cfg);

  MatF g_user = MatF::Zero(m.n_users(), cfg.d);
  MatF g_item = MatF::Zero(m.n_items(), cfg.d);
  MatF g_feat = MatF::Zero(m.n_features(), cfg.d);
  VecF g_ub = VecF::Zero(m.n_users());
  VecF g_ib = VecF::Zero(m.n_items());
  std::vector<char> t_user(static_cast<std::size_t>(m.n_users()), 0);
  std::vector<char> t_item(static_cast<std::size_t>(m.n_items()), 0);
  std::vector<char> t_feat(static_cast<std::size_t>(m.n_features()), 0);

  const int ratio = cfg.negatives_per_positive;
  TrainedModel out;
  out.kind = ModelKind::Hybrid;
  out.n_users = data.n_users;
  out.n_items = data.n_items;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> elements;
  std::vector<float> logits, diffs;
  std::vector<int> labels;
  std::vector<float> elem_grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_epoch_batches(data, seen, bp, cfg.seed, epoch);
    double loss_sum = 0.0;
    std::uint64_t n_elements = 0;

    for (const Batch& batch : batches) {
      if (batch.positives.empty()) continue;
      const std::size_t n_pos = batch.positives.size();

      // per scored element: (user, item) and dLoss/dScore
      elements.clear();
      elem_grads.clear();
      double batch_loss = 0.0;
      std::uint64_t batch_count = 0;

      if (cfg.loss == LossKind::Bce) {
        logits.clear();
        labels.clear();
        for (const auto& [u, i] : batch.positives) {
          logits.push_back(hybrid_score(m, u, i));
          labels.push_back(1);
          elements.emplace_back(u, i);
        }
        for (const auto& [u, i] : batch.negatives) {
          logits.push_back(hybrid_score(m, u, i));
          labels.push_back(0);
          elements.emplace_back(u, i);
        }
        LossResult<float> lr = bce_with_logits(logits, labels);
        elem_grads = std::move(lr.grad);
        batch_loss = lr.loss;
        batch_count = elements.size();
      } else {
        diffs.clear();
        for (std::size_t p = 0; p < n_pos; ++p) {
          const auto& [u, i] = batch.positives[p];
          const float s_pos = hybrid_score(m, u, i);
          for (int t = 0; t < ratio; ++t) {
            const auto& [nu, nj] = batch.negatives[p * static_cast<std::size_t>(ratio) +
                                                   static_cast<std::size_t>(t)];
            diffs.push_back(s_pos - hybrid_score(m, nu, nj));
          }
        }
        LossResult<float> lr = bpr_from_diffs(diffs);
        std::size_t k = 0;
        for (std::size_t p = 0; p < n_pos; ++p) {
          const auto& [u, i] = batch.positives[p];
          for (int t = 0; t < ratio; ++t, ++k) {
            const auto& [nu, nj] = batch.negatives[p * static_cast<std::size_t>(ratio) +
                                                   static_cast<std::size_t>(t)];
            elements.emplace_back(u, i);
            elem_grads.push_back(lr.grad[k]);
            elements.emplace_back(nu, nj);
            elem_grads.push_back(-lr.grad[k]);
          }
        }
        batch_loss = lr.loss;
        batch_count = diffs.size();
      }

      for (std::size_t k = 0; k < elements.size(); ++k) {
        const Index u = elements[k].first;
        const Index i = elements[k].second;
        const float gk = elem_grads[k];
        const VecF vi = hybrid_item_vector(m, i);
        g_user.row(u) += gk * vi.transpose();
        g_item.row(i) += gk * m.user_embeddings.row(u);
        for (std::int32_t f : m.item_features[static_cast<std::size_t>(i)]) {
          g_feat.row(f) += gk * m.user_embeddings.row(u);
          t_feat[static_cast<std::size_t>(f)] = 1;
        }
        g_ub[u] += gk;
        g_ib[i] += gk;
        t_user[static_cast<std::size_t>(u)] = 1;
        t_item[static_cast<std::size_t>(i)] = 1;
      }

      opt_user.begin_step();
      opt_item.begin_step();
      opt_feat.begin_step();
      opt_ub.begin_step();
      opt_ib.begin_step();
      for (Index u = 0; u < m.n_users(); ++u) {
        if (!t_user[static_cast<std::size_t>(u)]) continue;
        if (cfg.l2_user > 0) g_user.row(u) += 2.0f * cfg.l2_user * m.user_embeddings.row(u);
        opt_user.apply_row(m.user_embeddings, g_user, u);
        opt_ub.apply_scalar(m.user_bias, g_ub, u);  // biases stay unregularized
        g_user.row(u).setZero();
        g_ub[u] = 0.0f;
        t_user[static_cast<std::size_t>(u)] = 0;
      }
      for (Index i = 0; i < m.n_items(); ++i) {
        if (!t_item[static_cast<std::size_t>(i)]) continue;
        if (cfg.l2_item > 0) g_item.row(i) += 2.0f * cfg.l2_item * m.item_embeddings.row(i);
        opt_item.apply_row(m.item_embeddings, g_item, i);
        opt_ib.apply_scalar(m.item_bias, g_ib, i);
        g_item.row(i).setZero();
        g_ib[i] = 0.0f;
        t_item[static_cast<std::size_t>(i)] = 0;
      }
      for (Index f = 0; f < m.n_features(); ++f) {
        if (!t_feat[static_cast<std::size_t>(f)]) continue;
        if (cfg.l2_layer > 0) g_feat.row(f) += 2.0f * cfg.l2_layer * m.feature_embeddings.row(f);
        opt_feat.apply_row(m.feature_embeddings, g_feat, f);
        g_feat.row(f).setZero();
        t_feat[static_cast<std::size_t>(f)] = 0;
      }

      loss_sum += batch_loss * static_cast<double>(batch_count);
      n_elements += batch_count;
    }

    if (n_elements == 0) throw EmptyDataError("train: epoch produced no batches");
    const double loss = loss_sum / static_cast<double>(n_elements);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " +
                         std::to_string(epoch + 1) + "; reduce learning_rate (currently " +
                         std::to_string(cfg.learning_rate) + ")");
    }
    out.loss_history.push_back(loss);
  }
  out.hybrid = std::move(m);
  return out;
}

}  // namespace

TrainedModel fit(ModelKind kind, const PreparedData& data, const TrainConfig& cfg,
                 const AlsParams& als, int threads) {
  if (data.n_users <= 0 || data.n_items <= 0) throw EmptyDataError("train: empty dataset");
  switch (kind) {
    case ModelKind::Random: {
      TrainedModel out;
      out.kind = ModelKind::Random;
      out.n_users = data.n_users;
      out.n_items = data.n_items;
      return out;
    }
    case ModelKind::Mf:
    case ModelKind::Hge:
      return train_gradient(kind, data, cfg);
    case ModelKind::Hybrid:
      return train_hybrid(data, cfg);
    case ModelKind::Als: {
      TrainedModel out;
      out.kind = ModelKind::Als;
      out.n_users = data.n_users;
      out.n_items = data.n_items;
      // loss history carries the weighted objective curve for this kind
      out.als = als_fit(data.train, data.n_users, data.n_items, als, cfg.seed, threads,
                        &out.loss_history);
      return out;
    }
  }
  throw ConfigError("unknown model kind");
}

GridSearchResult grid_search(ModelKind kind, const PreparedData& data,
                             const TrainConfig& base, const std::vector<Index>& d_grid,
                             const std::vector<double>& lr_grid, int k,
                             const SplitParams& inner_split, int threads) {
  if (kind != ModelKind::Mf && kind != ModelKind::Hybrid && kind != ModelKind::Hge) {
    throw ConfigError("grid search applies to the gradient-trained kinds (mf, hybrid, hge)");
  }
  if (d_grid.empty() || lr_grid.empty()) throw ConfigError("grid search: empty grid");
  if (k < 1) throw ConfigError("grid search: k must be >= 1");

  std::vector<Index> ds = d_grid;
  std::vector<double> lrs = lr_grid;
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  std::sort(lrs.begin(), lrs.end());
  lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());

  // validation split carved from the outer train window with the same
  // protocol; outer test events never participate
  IndexedSplit inner = cold_start_split_indexed(data.train, inner_split,
                                                derive_seed(base.seed, "grid"));
  PreparedData inner_data;
  inner_data.n_users = data.n_users;
  inner_data.n_items = data.n_items;
  inner_data.train = std::move(inner.train);
  inner_data.test = std::move(inner.test);
  inner_data.cold_items = std::move(inner.cold_items);
  inner_data.user_ids = data.user_ids;
  inner_data.item_ids = data.item_ids;
  inner_data.levels = data.levels;
  inner_data.seed = data.seed;

  GridSearchResult res;
  res.k = k;
  res.best = base;
  double best_precision = -1.0;
  for (Index d : ds) {
    for (double lr : lrs) {
      TrainConfig cfg = base;
      cfg.d = d;
      cfg.learning_rate = static_cast<float>(lr);
      TrainedModel m = fit(kind, inner_data, cfg, {}, threads);
      auto rec = make_recommender(m, derive_seed(base.seed, "grid:eval"));
      EvalReport rep = evaluate_cold(*rec, inner_data, {k},
                                     derive_seed(base.seed, "grid:eval"), threads);
      const double precision = rep.metrics.at(0).precision;
      res.table.push_back({d, lr, precision});
      // strict improvement only: the d-major ascending scan makes ties land
      // on the smaller d, then the smaller learning rate
      if (precision > best_precision) {
        best_precision = precision;
        res.best = cfg;
      }
    }
  }
  if (lrs.size() >= 2) {
    const float chosen = res.best.learning_rate;
    if (chosen == static_cast<float>(lrs.front()) ||
        chosen == static_cast<float>(lrs.back())) {
      res.warnings.push_back(
          "chosen learning_rate " + std::to_string(chosen) +
          " sits on the grid edge; consider widening the learning-rate grid");
    }
  }
  return res;
}

}  // namespace hge
