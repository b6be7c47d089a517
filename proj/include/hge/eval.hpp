#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hge/prepared.hpp"
#include "hge/train.hpp"
#include "hge/types.hpp"

namespace hge {

// Fraction of users whose top-k list contains at least one relevant item.
// `truth` rows are sorted item indices; rows must be non-empty.
double hit_rate_at_k(const std::vector<std::vector<Index>>& recommended,
                     const std::vector<std::vector<Index>>& truth, Index k);

// Mean over users of |hits| / |list served|, so a candidate pool shorter
// than k divides by what was actually recommended instead of punishing the
// model for an impossible ask.
double precision_at_k(const std::vector<std::vector<Index>>& recommended,
                      const std::vector<std::vector<Index>>& truth, Index k);

class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual double score(Index user, Index item) const = 0;
  // Top-k over `candidates` minus `exclude_sorted`, score descending with
  // index ascending as the tiebreak. May return fewer than k.
  virtual std::vector<Index> topk(Index user, const std::vector<Index>& candidates,
                                  const std::vector<Index>& exclude_sorted, Index k) const;
};

// Adapts a trained model of any kind; `seed` only matters for the random
// baseline, which ignores scores and samples per user.
std::unique_ptr<Recommender> make_recommender(const TrainedModel& m, std::uint64_t seed);

// Item representations as the scorer sees them (base table with every
// refinement folded in). Unavailable for the random baseline.
MatF effective_item_embeddings(const TrainedModel& m);

struct KMetrics {
  int k = 0;
  double hit_rate = 0.0;
  double precision = 0.0;
};

// What a user's ranking list is drawn from. ColdOnly isolates the
// cold-start question; AllItems widens the pool to every item the user has
// not touched in train, as a sensitivity check.
enum class CandidateMode { ColdOnly, AllItems };

struct EvalReport {
  std::vector<KMetrics> metrics;
  Index n_eval_users = 0;        // users with at least one cold test event
  Index n_cold_items = 0;
  Index short_pool_users = 0;    // users whose candidate pool was < max k
  CandidateMode candidates = CandidateMode::ColdOnly;
  std::uint64_t seed = 0;
};

// Cold-item protocol: per user with >= 1 cold test event, rank the candidate
// items they have not touched in train and score the list against their
// cold test items. Users are sharded across `threads` and reduced in a
// fixed order, so the result is independent of thread count.
EvalReport evaluate_cold(const Recommender& rec, const PreparedData& data,
                         const std::vector<int>& ks, std::uint64_t seed, int threads = 1,
                         CandidateMode candidates = CandidateMode::ColdOnly);

struct ClusterLevelStats {
  int level = 0;
  double intra = 0.0;        // mean cosine within a category
  double inter = 0.0;        // mean cosine across categories
  double separation = 0.0;   // intra - inter
  std::uint64_t intra_pairs = 0;
  std::uint64_t inter_pairs = 0;
  bool exact = false;        // true when the pair space was enumerated
};

struct ClusterReport {
  std::vector<ClusterLevelStats> levels;
  std::uint64_t seed = 0;
};

// Embedding-geometry probe: mean cosine similarity for sampled same-category
// and cross-category item pairs at every hierarchy level. Pair spaces no
// larger than `pairs_per_side` are enumerated exactly instead of sampled.
ClusterReport cluster_report(const MatF& item_embeddings,
                             const std::vector<LeveledIncidence>& levels,
                             std::uint64_t seed, std::uint64_t pairs_per_side = 10000);

// Writes one row per item: id, its category label at every level, then the
// embedding coordinates, tab separated with a header.
void export_embeddings(const MatF& item_embeddings, const PreparedData& data,
                       const std::string& path);

}  // namespace hge
