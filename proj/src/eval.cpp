#include "hge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "hge/parallel.hpp"
#include "hge/ranking.hpp"
#include "hge/rng.hpp"

namespace hge {

namespace {

// hits among the first min(k, |rec|) entries; truth rows are sorted
std::size_t hits_at_k(const std::vector<Index>& rec, const std::vector<Index>& truth, Index k) {
  const std::size_t upto = std::min(rec.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t p = 0; p < upto; ++p) {
    if (std::binary_search(truth.begin(), truth.end(), rec[p])) ++hits;
  }
  return hits;
}

void check_metric_inputs(const std::vector<std::vector<Index>>& recommended,
                         const std::vector<std::vector<Index>>& truth, Index k) {
  if (k <= 0) throw ConfigError("metrics: k must be positive");
  if (recommended.size() != truth.size()) {
    throw ShapeError("metrics: " + std::to_string(recommended.size()) + " recommendation lists vs " +
                     std::to_string(truth.size()) + " truth sets");
  }
  if (recommended.empty()) throw EmptyDataError("metrics: no users to evaluate");
  for (const auto& t : truth) {
    if (t.empty()) throw DataError("metrics: every user must have at least one relevant item");
  }
}

}  // namespace

double hit_rate_at_k(const std::vector<std::vector<Index>>& recommended,
                     const std::vector<std::vector<Index>>& truth, Index k) {
  check_metric_inputs(recommended, truth, k);
  std::size_t hit_users = 0;
  for (std::size_t u = 0; u < recommended.size(); ++u) {
    if (hits_at_k(recommended[u], truth[u], k) > 0) ++hit_users;
  }
  return static_cast<double>(hit_users) / static_cast<double>(recommended.size());
}

double precision_at_k(const std::vector<std::vector<Index>>& recommended,
                      const std::vector<std::vector<Index>>& truth, Index k) {
  check_metric_inputs(recommended, truth, k);
  double total = 0.0;
  for (std::size_t u = 0; u < recommended.size(); ++u) {
    const std::size_t served = std::min(recommended[u].size(), static_cast<std::size_t>(k));
    if (served == 0) continue;  // nothing could be recommended; counts as zero
    total += static_cast<double>(hits_at_k(recommended[u], truth[u], k)) /
             static_cast<double>(served);
  }
  return total / static_cast<double>(recommended.size());
}

std::vector<Index> Recommender::topk(Index user, const std::vector<Index>& candidates,
                                     const std::vector<Index>& exclude_sorted, Index k) const {
  return recommend_topk([this, user](Index i) { return score(user, i); }, candidates,
                        exclude_sorted, k);
}

namespace {

class MatrixRecommender final : public Recommender {
 public:
  MatrixRecommender(MatF users, MatF items) : users_(std::move(users)), items_(std::move(items)) {}

  double score(Index user, Index item) const override {
    if (user < 0 || user >= users_.rows()) {
      throw DataError("recommender: user index " + std::to_string(user) + " out of range");
    }
    if (item < 0 || item >= items_.rows()) {
      throw DataError("recommender: item index " + std::to_string(item) + " out of range");
    }
    return static_cast<double>(users_.row(user).dot(items_.row(item)));
  }

 private:
  MatF users_, items_;
};

class BiasedMatrixRecommender final : public Recommender {
 public:
  BiasedMatrixRecommender(MatF users, MatF items, VecF user_bias, VecF item_bias)
      : users_(std::move(users)),
        items_(std::move(items)),
        user_bias_(std::move(user_bias)),
        item_bias_(std::move(item_bias)) {}

  double score(Index user, Index item) const override {
    if (user < 0 || user >= users_.rows()) {
      throw DataError("recommender: user index " + std::to_string(user) + " out of range");
    }
    if (item < 0 || item >= items_.rows()) {
      throw DataError("recommender: item index " + std::to_string(item) + " out of range");
    }
    return static_cast<double>(users_.row(user).dot(items_.row(item))) +
           static_cast<double>(user_bias_[user]) + static_cast<double>(item_bias_[item]);
  }

 private:
  MatF users_, items_;
  VecF user_bias_, item_bias_;
};

class RandomRecommender final : public Recommender {
 public:
  RandomRecommender(Index n_users, Index n_items, std::uint64_t seed)
      : n_users_(n_users), n_items_(n_items), seed_(seed) {}

  double score(Index user, Index item) const override {
    if (user < 0 || user >= n_users_ || item < 0 || item >= n_items_) {
      throw DataError("recommender: index out of range");
    }
    return 0.0;  // ranking comes from the per-user sample, not from scores
  }

  std::vector<Index> topk(Index user, const std::vector<Index>& candidates,
                          const std::vector<Index>& exclude_sorted, Index k) const override {
    if (k <= 0) throw ConfigError("recommender: k must be positive");
    std::vector<Index> pool;
    pool.reserve(candidates.size());
    for (Index i : candidates) {
      if (!std::binary_search(exclude_sorted.begin(), exclude_sorted.end(), i)) pool.push_back(i);
    }
    return random_recommend(user, k, pool, seed_);
  }

 private:
  Index n_users_, n_items_;
  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<Recommender> make_recommender(const TrainedModel& m, std::uint64_t seed) {
  switch (m.kind) {
    case ModelKind::Random:
      return std::make_unique<RandomRecommender>(m.n_users, m.n_items, seed);
    case ModelKind::Mf:
      return std::make_unique<MatrixRecommender>(m.mf.user_embeddings, m.mf.item_embeddings);
    case ModelKind::Als:
      return std::make_unique<MatrixRecommender>(m.als.x, m.als.y);
    case ModelKind::Hybrid: {
      MatF items(m.hybrid.n_items(), m.hybrid.d());
      for (Index i = 0; i < m.hybrid.n_items(); ++i) {
        items.row(i) = hybrid_item_vector(m.hybrid, i).transpose();
      }
      return std::make_unique<BiasedMatrixRecommender>(m.hybrid.user_embeddings, std::move(items),
                                                       m.hybrid.user_bias, m.hybrid.item_bias);
    }
    case ModelKind::Hge:
      return std::make_unique<MatrixRecommender>(m.hge.base.user_embeddings,
                                                 hge_item_embeddings(m.hge));
  }
  throw ConfigError("unknown model kind");
}

MatF effective_item_embeddings(const TrainedModel& m) {
  switch (m.kind) {
    case ModelKind::Random:
      throw ConfigError("the random baseline has no item embeddings to export");
    case ModelKind::Mf:
      return m.mf.item_embeddings;
    case ModelKind::Als:
      return m.als.y;
    case ModelKind::Hybrid: {
      MatF items(m.hybrid.n_items(), m.hybrid.d());
      for (Index i = 0; i < m.hybrid.n_items(); ++i) {
        items.row(i) = hybrid_item_vector(m.hybrid, i).transpose();
      }
      return items;
    }
    case ModelKind::Hge:
      return hge_item_embeddings(m.hge);
  }
  throw ConfigError("unknown model kind");
}

EvalReport evaluate_cold(const Recommender& rec, const PreparedData& data,
                         const std::vector<int>& ks, std::uint64_t seed, int threads,
                         CandidateMode mode) {
  if (ks.empty()) throw ConfigError("evaluate: no cutoffs given");
  Index max_k = 0;
  for (int k : ks) {
    if (k < 1) throw ConfigError("evaluate: k must be >= 1");
    max_k = std::max<Index>(max_k, k);
  }
  if (data.test.empty()) throw EmptyDataError("evaluate: no test events");

  std::vector<Index> candidates;
  if (mode == CandidateMode::ColdOnly) {
    candidates.assign(data.cold_items.begin(), data.cold_items.end());
  } else {
    candidates.resize(static_cast<std::size_t>(data.n_items));
    std::iota(candidates.begin(), candidates.end(), Index{0});
  }
  const auto seen = data.train_items_by_user();

  // cold test items per user, sorted unique; items the user already consumed
  // in train are outside the candidate pool, so they leave the truth set too
  std::vector<std::vector<Index>> truth_by_user(static_cast<std::size_t>(data.n_users));
  for (const auto& e : data.test) {
    const auto& seen_u = seen[e.user];
    if (std::binary_search(seen_u.begin(), seen_u.end(), e.item)) continue;
    truth_by_user[e.user].push_back(static_cast<Index>(e.item));
  }
  std::vector<Index> eval_users;
  for (Index u = 0; u < data.n_users; ++u) {
    auto& t = truth_by_user[static_cast<std::size_t>(u)];
    if (t.empty()) continue;
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    eval_users.push_back(u);
  }
  if (eval_users.empty()) throw EmptyDataError("evaluate: no users with cold test events");

  std::vector<std::vector<Index>> recs(eval_users.size());
  std::vector<char> short_pool(eval_users.size(), 0);
  parallel_for(static_cast<Index>(eval_users.size()), threads, [&](Index idx) {
    const Index u = eval_users[static_cast<std::size_t>(idx)];
    const auto& seen_u = seen[static_cast<std::size_t>(u)];
    std::vector<Index> exclude(seen_u.begin(), seen_u.end());
    std::size_t excluded_cold = 0;
    for (Index i : candidates) {
      if (std::binary_search(exclude.begin(), exclude.end(), i)) ++excluded_cold;
    }
    const std::size_t pool = candidates.size() - excluded_cold;
    if (pool < static_cast<std::size_t>(max_k)) short_pool[static_cast<std::size_t>(idx)] = 1;
    if (pool > 0) {
      recs[static_cast<std::size_t>(idx)] = rec.topk(u, candidates, exclude, max_k);
    }
  });

  std::vector<std::vector<Index>> truth(eval_users.size());
  for (std::size_t idx = 0; idx < eval_users.size(); ++idx) {
    truth[idx] = std::move(truth_by_user[static_cast<std::size_t>(eval_users[idx])]);
  }

  EvalReport report;
  report.n_eval_users = static_cast<Index>(eval_users.size());
  report.n_cold_items = static_cast<Index>(data.cold_items.size());
  report.candidates = mode;
  report.seed = seed;
  for (char s : short_pool) report.short_pool_users += s;
  for (int k : ks) {
    KMetrics m;
    m.k = k;
    m.hit_rate = hit_rate_at_k(recs, truth, k);
    m.precision = precision_at_k(recs, truth, k);
    report.metrics.push_back(m);
  }
  return report;
}

namespace {

double cosine(const MatF& e, Index a, Index b) {
  const VecD va = e.row(a).transpose().cast<double>();
  const VecD vb = e.row(b).transpose().cast<double>();
  const double na = va.norm(), nb = vb.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0);
}

}  // namespace

ClusterReport cluster_report(const MatF& item_embeddings,
                             const std::vector<LeveledIncidence>& levels, std::uint64_t seed,
                             std::uint64_t pairs_per_side) {
  if (levels.empty()) throw ConfigError("cluster report: no hierarchy levels");
  if (pairs_per_side == 0) throw ConfigError("cluster report: pairs_per_side must be positive");
  const Index n_items = item_embeddings.rows();

  ClusterReport report;
  report.seed = seed;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const SparseIncidence& inc = levels[l].incidence;
    if (inc.n_items() != n_items) {
      throw ShapeError("cluster report: " + std::to_string(n_items) + " embeddings for " +
                       std::to_string(inc.n_items()) + " items");
    }
    ClusterLevelStats stats;
    stats.level = static_cast<int>(l + 1);

    // same-category side: pair space sum_c C(n_c, 2)
    std::uint64_t intra_total = 0;
    std::vector<std::uint64_t> per_cat;
    per_cat.reserve(static_cast<std::size_t>(inc.n_categories()));
    for (Index c = 0; c < inc.n_categories(); ++c) {
      const std::uint64_t n = inc.members(c).size();
      per_cat.push_back(n * (n - 1) / 2);
      intra_total += per_cat.back();
    }
    const std::uint64_t all_pairs =
        static_cast<std::uint64_t>(n_items) * static_cast<std::uint64_t>(n_items - 1) / 2;
    const std::uint64_t inter_total = all_pairs - intra_total;

    double intra_sum = 0.0;
    std::uint64_t intra_n = 0;
    bool intra_exact = intra_total <= pairs_per_side;
    if (intra_exact) {
      for (Index c = 0; c < inc.n_categories(); ++c) {
        const auto& m = inc.members(c);
        for (std::size_t a = 0; a < m.size(); ++a) {
          for (std::size_t b = a + 1; b < m.size(); ++b) {
            intra_sum += cosine(item_embeddings, m[a], m[b]);
            ++intra_n;
          }
        }
      }
    } else {
      Rng rng(derive_seed(seed, "cluster:intra:" + std::to_string(stats.level)));
      for (std::uint64_t t = 0; t < pairs_per_side; ++t) {
        // category chosen with probability proportional to its pair count
        std::uint64_t pick = rng.below(intra_total);
        Index c = 0;
        while (pick >= per_cat[static_cast<std::size_t>(c)]) {
          pick -= per_cat[static_cast<std::size_t>(c)];
          ++c;
        }
        const auto& m = inc.members(c);
        const std::size_t a = static_cast<std::size_t>(rng.below(m.size()));
        std::size_t b = static_cast<std::size_t>(rng.below(m.size() - 1));
        if (b >= a) ++b;
        intra_sum += cosine(item_embeddings, m[a], m[b]);
        ++intra_n;
      }
    }

    double inter_sum = 0.0;
    std::uint64_t inter_n = 0;
    bool inter_exact = inter_total <= pairs_per_side;
    if (inter_exact) {
      for (Index a = 0; a < n_items; ++a) {
        for (Index b = a + 1; b < n_items; ++b) {
          if (inc.category_of(a) == inc.category_of(b)) continue;
          inter_sum += cosine(item_embeddings, a, b);
          ++inter_n;
        }
      }
    } else {
      Rng rng(derive_seed(seed, "cluster:inter:" + std::to_string(stats.level)));
      for (std::uint64_t t = 0; t < pairs_per_side; ++t) {
        Index a, b;
        do {
          a = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_items)));
          b = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_items)));
        } while (a == b || inc.category_of(a) == inc.category_of(b));
        inter_sum += cosine(item_embeddings, a, b);
        ++inter_n;
      }
    }

    stats.intra = intra_n > 0 ? intra_sum / static_cast<double>(intra_n) : 0.0;
    stats.inter = inter_n > 0 ? inter_sum / static_cast<double>(inter_n) : 0.0;
    stats.separation = stats.intra - stats.inter;
    stats.intra_pairs = intra_n;
    stats.inter_pairs = inter_n;
    stats.exact = intra_exact && inter_exact;
    report.levels.push_back(stats);
  }
  return report;
}

void export_embeddings(const MatF& item_embeddings, const PreparedData& data,
                       const std::string& path) {
  if (item_embeddings.rows() != data.n_items) {
    throw ShapeError("export: " + std::to_string(item_embeddings.rows()) + " embedding rows for " +
                     std::to_string(data.n_items) + " items");
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("export: cannot open '" + path + "' for writing");

  os << "item_id";
  for (int l = 1; l <= data.n_levels(); ++l) os << "\tlevel_" << l;
  for (Index k = 1; k <= item_embeddings.cols(); ++k) os << "\te_" << k;
  os << "\n";

  char buf[64];
  for (Index i = 0; i < data.n_items; ++i) {
    os << data.item_ids[static_cast<std::size_t>(i)];
    for (const auto& level : data.levels) {
      os << '\t' << level.labels[static_cast<std::size_t>(level.incidence.category_of(i))];
    }
    for (Index k = 0; k < item_embeddings.cols(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.6g", static_cast<double>(item_embeddings(i, k)));
      os << '\t' << buf;
    }
    os << '\n';
  }
  os.flush();
  if (!os) throw IoError("export: write to '" + path + "' failed");
}

}  // namespace hge
