#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hge/als.hpp"
#include "hge/batch.hpp"
#include "hge/hge_model.hpp"
#include "hge/hybrid.hpp"
#include "hge/prepared.hpp"

namespace hge {

enum class ModelKind { Random = 0, Mf = 1, Als = 2, Hybrid = 3, Hge = 4 };
enum class LossKind { Bce, Bpr };
enum class OptimizerKind { Sgd, Adam };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct TrainConfig {
  Index d = 32;
  Index h = 32;
  float learning_rate = 0.01f;
  int epochs = 30;
  Index batch_size = 1024;
  int negatives_per_positive = 4;
  float l2_user = 1e-6f;
  float l2_item = 1e-6f;
  float l2_layer = 1e-6f;
  OptimizerKind optimizer = OptimizerKind::Adam;
  float adam_beta1 = 0.9f;
  float adam_beta2 = 0.999f;
  float adam_eps = 1e-8f;
  SamplingMode sampling_mode = SamplingMode::LogProportional;
  int stratify_level = 1;
  LossKind loss = LossKind::Bce;
  std::uint64_t seed = 7;
  // layer stack + ablation switches
  std::vector<int> levels;  // empty = every level in the data, finest first
  bool skip = true;
  bool masked_softmax = true;
  Activation activation = Activation::Relu;
  float leaky_alpha = 0.01f;
};

// One container for every trainable family; `kind` says which member is live.
struct TrainedModel {
  ModelKind kind = ModelKind::Mf;
  MfModel mf;
  HgeModel hge;
  HybridMfModel hybrid;
  AlsModel als;
  Index n_users = 0;
  Index n_items = 0;
  std::vector<double> loss_history;  // mean data loss per epoch (gradient kinds)
};

std::int64_t param_count(const TrainedModel& m);

// Row-sparse first-order updates: only rows named by a batch are touched, and
// Adam keeps lazy per-row moments with bias correction at the shared step
// count, so untouched rows never decay. A zero gradient row is a no-op under
// both rules.
class RowOptimizer {
 public:
  RowOptimizer() = default;
  RowOptimizer(Index rows, Index cols, const TrainConfig& cfg);

  void begin_step() { ++t_; }
  void apply_row(MatF& param, const MatF& grad, Index row);
  void apply_scalar(VecF& param, const VecF& grad, Index row);

 private:
  OptimizerKind kind_ = OptimizerKind::Sgd;
  double lr_ = 0.01;
  double b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  MatF m_, v_;  // adam moments (empty for sgd)
};

// One gradient model plus its optimizer state; processes externally supplied
// batch sequences so the timing harness can feed byte-identical batches to
// models of different depth. fit() drives this for the Mf and Hge kinds.
class GdTrainer {
 public:
  GdTrainer(HgeModel model, TrainConfig cfg);

  // One pass over the batches; returns the mean data loss per scored element
  // (pairs under the ranking loss). Throws NumericError when non-finite.
  double run_epoch(const std::vector<Batch>& batches);

  const HgeModel& model() const { return model_; }
  HgeModel take_model() { return std::move(model_); }

 private:
  HgeModel model_;
  TrainConfig cfg_;
  RowOptimizer opt_user_, opt_item_;
  std::vector<RowOptimizer> opt_w1_, opt_w2_;
  HgeGradients<float> grads_;
};

// Seeded initializers: embeddings and w2 uniform in [-0.01, 0.01], w1
// uniform in [0, 0.01], biases zero.
HgeModel init_hge_model(const PreparedData& data, const TrainConfig& cfg, bool with_layers);
HybridMfModel init_hybrid_model(const PreparedData& data, const TrainConfig& cfg);

// Mini-batch training for the gradient families (Mf, Hybrid, Hge) over the
// stratified batch stream; Als dispatches to the alternating solver and
// Random just records the shapes. Aborts with a numeric error naming the
// learning rate if the loss goes non-finite.
TrainedModel fit(ModelKind kind, const PreparedData& data, const TrainConfig& cfg,
                 const AlsParams& als = {}, int threads = 1);

struct GridCell {
  Index d = 0;
  double learning_rate = 0.0;
  double precision = 0.0;
};

struct GridSearchResult {
  TrainConfig best;
  std::vector<GridCell> table;   // d-major, learning rate minor
  std::vector<std::string> warnings;
  int k = 10;
};

// Exhaustive (d, learning_rate) sweep validated on an inner cold-start split
// carved from the train window with the same protocol as the outer split.
// Ties prefer the smaller d, then the smaller learning rate. A winning
// learning rate on the grid edge is reported as a warning, not an error.
GridSearchResult grid_search(ModelKind kind, const PreparedData& data,
                             const TrainConfig& base, const std::vector<Index>& d_grid,
                             const std::vector<double>& lr_grid, int k,
                             const SplitParams& inner_split, int threads = 1);

}  // namespace hge
