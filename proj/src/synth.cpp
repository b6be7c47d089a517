#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hge/rng.hpp"
#include "hge/synth.hpp"
#include "hge/types.hpp"

namespace hge {

namespace {

std::string zero_pad(Index v, int width) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

std::pair<InteractionLog, Hierarchy> synth_generate(const SynthParams& p, std::uint64_t seed,
                                                    MatD* item_latents) {
  if (p.n_users <= 0 || p.n_items <= 0) throw ConfigError("synth: needs users and items");
  if (p.n_levels < 1) throw ConfigError("synth: n_levels must be >= 1");
  if (static_cast<int>(p.branching.size()) != p.n_levels) {
    throw ConfigError("synth: branching must list one factor per level");
  }
  for (int b : p.branching) {
    if (b < 1) throw ConfigError("synth: branching factors must be >= 1");
  }
  if (p.d_true < 1) throw ConfigError("synth: d_true must be >= 1");
  if (p.noise < 0.0) throw ConfigError("synth: noise must be >= 0");
  if (p.interactions_per_user < 1) throw ConfigError("synth: interactions_per_user must be >= 1");
  if (p.interactions_per_user > p.n_items) {
    throw ConfigError("synth: interactions_per_user exceeds the item count");
  }
  if (p.span_days < 1) throw ConfigError("synth: span_days must be >= 1");
  if (!(p.temperature > 0.0)) throw ConfigError("synth: temperature must be positive");

  // node counts per level, top (coarsest) first
  std::vector<Index> counts(static_cast<std::size_t>(p.n_levels));
  Index acc = 1;
  for (int l = 0; l < p.n_levels; ++l) {
    acc *= p.branching[static_cast<std::size_t>(l)];
    counts[static_cast<std::size_t>(l)] = acc;
  }
  const Index n_leaves = counts.back();
  if (n_leaves > p.n_items) {
    throw ConfigError("synth: tree has more leaf categories than items");
  }

  // latent centers down the tree; perturbation scale halves per level
  Rng tree_rng(derive_seed(seed, "synth:tree"));
  std::vector<MatD> centers(static_cast<std::size_t>(p.n_levels));
  for (int l = 0; l < p.n_levels; ++l) {
    auto& level = centers[static_cast<std::size_t>(l)];
    level.resize(counts[static_cast<std::size_t>(l)], p.d_true);
    const double scale = l == 0 ? 1.0 : std::pow(0.5, l);
    const int fanout = p.branching[static_cast<std::size_t>(l)];
    for (Index node = 0; node < level.rows(); ++node) {
      for (Index j = 0; j < p.d_true; ++j) {
        const double g = tree_rng.gaussian();
        level(node, j) =
            l == 0 ? g : centers[static_cast<std::size_t>(l - 1)](node / fanout, j) + scale * g;
      }
    }
  }

  // items: contiguous blocks per leaf, latent = leaf center + noise
  Rng item_rng(derive_seed(seed, "synth:items"));
  MatD item_latent(p.n_items, p.d_true);
  std::vector<Index> leaf_of(static_cast<std::size_t>(p.n_items));
  for (Index i = 0; i < p.n_items; ++i) {
    const Index leaf = i * n_leaves / p.n_items;
    leaf_of[static_cast<std::size_t>(i)] = leaf;
    for (Index j = 0; j < p.d_true; ++j) {
      item_latent(i, j) = centers.back()(leaf, j) + p.noise * item_rng.gaussian();
    }
  }

  if (item_latents) *item_latents = item_latent;

  Rng user_rng(derive_seed(seed, "synth:users"));
  MatD user_latent(p.n_users, p.d_true);
  for (Index u = 0; u < p.n_users; ++u) {
    for (Index j = 0; j < p.d_true; ++j) user_latent(u, j) = user_rng.gaussian();
  }

  // id widths keep lexicographic order == numeric order
  const int user_width = static_cast<int>(std::to_string(p.n_users - 1).size());
  const int item_width = static_cast<int>(std::to_string(p.n_items - 1).size());

  // hierarchy labels: ancestor node id at each level, finest level first
  Hierarchy h;
  h.n_levels = p.n_levels;
  h.assignment.resize(static_cast<std::size_t>(p.n_levels));
  for (Index i = 0; i < p.n_items; ++i) {
    const std::string item_id = "i" + zero_pad(i, item_width);
    Index node = leaf_of[static_cast<std::size_t>(i)];
    for (int l = p.n_levels - 1; l >= 0; --l) {
      // tree level l holds counts[l] nodes; hierarchy level (n_levels - l)
      const int out_level = p.n_levels - l;
      h.assignment[static_cast<std::size_t>(out_level - 1)].emplace(
          item_id, "L" + std::to_string(out_level) + "c" + std::to_string(node));
      node /= p.branching[static_cast<std::size_t>(l)];
    }
  }

  // softmax sampling of distinct items per user
  Rng ev_rng(derive_seed(seed, "synth:events"));
  Rng ts_rng(derive_seed(seed, "synth:time"));
  constexpr std::int64_t kEpoch = 1600000000;
  const std::int64_t span = static_cast<std::int64_t>(p.span_days) * 86400;

  InteractionLog log;
  log.events.reserve(static_cast<std::size_t>(p.n_users * p.interactions_per_user));
  VecD probs(p.n_items);
  for (Index u = 0; u < p.n_users; ++u) {
    VecD scores = item_latent * user_latent.row(u).transpose();
    scores /= p.temperature;
    const double mx = scores.maxCoeff();
    double total = 0.0;
    for (Index i = 0; i < p.n_items; ++i) {
      probs[i] = std::exp(scores[i] - mx);
      total += probs[i];
    }
    // cumulative for inverse-CDF draws
    double running = 0.0;
    for (Index i = 0; i < p.n_items; ++i) {
      running += probs[i] / total;
      probs[i] = running;
    }
    probs[p.n_items - 1] = 1.0;

    std::unordered_set<Index> picked;
    const std::string user_id = "u" + zero_pad(u, user_width);
    while (static_cast<int>(picked.size()) < p.interactions_per_user) {
      const double r = ev_rng.uniform();
      const Index i = static_cast<Index>(
          std::lower_bound(probs.data(), probs.data() + p.n_items, r) - probs.data());
      if (!picked.insert(i).second) continue;
      Event ev;
      ev.user_id = user_id;
      ev.item_id = "i" + zero_pad(i, item_width);
      ev.timestamp = kEpoch + static_cast<std::int64_t>(ts_rng.below(
                                  static_cast<std::uint64_t>(span)));
      ev.value = 5.0f;
      log.events.push_back(std::move(ev));
    }
  }
  return {std::move(log), std::move(h)};
}

}  // namespace hge
