#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_map>

#include "hge/als.hpp"
#include "hge/parallel.hpp"
#include "hge/rng.hpp"

namespace hge {

namespace {

// observed (index, multiplicity) lists, indices ascending
std::vector<std::vector<std::pair<std::uint32_t, float>>> group_counts(
    const std::vector<IndexedEvent>& train, Index n_rows, bool by_user) {
  std::vector<std::vector<std::pair<std::uint32_t, float>>> out(
      static_cast<std::size_t>(n_rows));
  std::vector<std::vector<std::uint32_t>> raw(static_cast<std::size_t>(n_rows));
  for (const IndexedEvent& ev : train) {
    raw[by_user ? ev.user : ev.item].push_back(by_user ? ev.item : ev.user);
  }
  for (std::size_t r = 0; r < raw.size(); ++r) {
    auto& list = raw[r];
    std::sort(list.begin(), list.end());
    for (std::size_t k = 0; k < list.size();) {
      std::size_t j = k;
      while (j < list.size() && list[j] == list[k]) ++j;
      out[r].emplace_back(list[k], static_cast<float>(j - k));
      k = j;
    }
  }
  return out;
}

double sum_sq(const MatD& m) { return m.squaredNorm(); }

// one alternating half-step: solve every row of `solve_for` with `fixed` held
void half_step(MatD& solve_for, const MatD& fixed,
               const std::vector<std::vector<std::pair<std::uint32_t, float>>>& observed,
               double lambda, double alpha, int threads) {
  const Index d = fixed.cols();
  const MatD gram = fixed.transpose() * fixed;  // shared base term, c = 1 everywhere
  std::atomic<bool> bad{false};
  parallel_for(solve_for.rows(), threads, [&](Index r) {
    MatD a = gram;
    VecD b = VecD::Zero(d);
    for (const auto& [j, n] : observed[static_cast<std::size_t>(r)]) {
      const double conf_extra = alpha * static_cast<double>(n);  // c - 1
      a.noalias() += conf_extra * fixed.row(j).transpose() * fixed.row(j);
      b.noalias() += (1.0 + conf_extra) * fixed.row(j).transpose();
    }
    a.diagonal().array() += lambda;
    const VecD sol = a.ldlt().solve(b);
    if (!sol.allFinite()) {
      bad.store(true);
      return;
    }
    solve_for.row(r) = sol.transpose();
  });
  if (bad.load()) {
    throw NumericError("als: singular normal equations; increase the regularizers");
  }
}

double objective_impl(const MatD& x, const MatD& y,
                      const std::vector<IndexedEvent>& train, double lambda_x,
                      double lambda_y, double alpha) {
  // base term with c = 1, r = 0 for every pair: ||X Y^T||_F^2 via the Gram trick
  const MatD gx = x.transpose() * x;
  const MatD gy = y.transpose() * y;
  double loss = (gx.array() * gy.array()).sum();
  // corrections on observed pairs: c (1 - s)^2 replaces s^2
  std::unordered_map<std::uint64_t, float> counts;
  counts.reserve(train.size());
  for (const IndexedEvent& ev : train) {
    counts[(static_cast<std::uint64_t>(ev.user) << 32) | ev.item] += 1.0f;
  }
  for (const auto& [key, n] : counts) {
    const Index u = static_cast<Index>(key >> 32);
    const Index i = static_cast<Index>(key & 0xffffffffULL);
    const double s = x.row(u).dot(y.row(i));
    const double c = 1.0 + alpha * static_cast<double>(n);
    loss += c * (1.0 - s) * (1.0 - s) - s * s;
  }
  return loss + lambda_x * sum_sq(x) + lambda_y * sum_sq(y);
}

}  // namespace

double als_objective(const AlsModel& m, const std::vector<IndexedEvent>& train,
                     Index n_users, Index n_items) {
  if (m.x.rows() != n_users || m.y.rows() != n_items) {
    throw ShapeError("als_objective: model shapes disagree with the given counts");
  }
  return objective_impl(m.x.cast<double>(), m.y.cast<double>(), train,
                        m.lambda_x, m.lambda_y, m.alpha);
}

AlsModel als_fit(const std::vector<IndexedEvent>& train, Index n_users, Index n_items,
                 const AlsParams& p, std::uint64_t seed, int threads,
                 std::vector<double>* objective_curve) {
  if (train.empty()) throw EmptyDataError("als: no train events");
  if (p.d < 1) throw ConfigError("als: d must be >= 1");
  if (p.iterations < 1) throw ConfigError("als: iterations must be >= 1");
  if (p.lambda_x < 0.0f || p.lambda_y < 0.0f) throw ConfigError("als: negative regularizer");
  if (p.alpha < 0.0f) throw ConfigError("als: negative alpha");
  for (const IndexedEvent& ev : train) {
    if (static_cast<Index>(ev.user) >= n_users || static_cast<Index>(ev.item) >= n_items) {
      throw DataError("als: event index out of range");
    }
  }

  Rng rng(derive_seed(seed, "als:init"));
  MatD x(n_users, p.d), y(n_items, p.d);
  for (Index u = 0; u < n_users; ++u) {
    for (Index j = 0; j < p.d; ++j) x(u, j) = rng.uniform(-0.01, 0.01);
  }
  for (Index i = 0; i < n_items; ++i) {
    for (Index j = 0; j < p.d; ++j) y(i, j) = rng.uniform(-0.01, 0.01);
  }

  const auto by_user = group_counts(train, n_users, /*by_user=*/true);
  const auto by_item = group_counts(train, n_items, /*by_user=*/false);

  if (objective_curve) {
    objective_curve->clear();
    objective_curve->push_back(objective_impl(x, y, train, p.lambda_x, p.lambda_y, p.alpha));
  }
  for (int it = 0; it < p.iterations; ++it) {
    half_step(x, y, by_user, p.lambda_x, p.alpha, threads);
    if (objective_curve) {
      objective_curve->push_back(objective_impl(x, y, train, p.lambda_x, p.lambda_y, p.alpha));
    }
    half_step(y, x, by_item, p.lambda_y, p.alpha, threads);
    if (objective_curve) {
      objective_curve->push_back(objective_impl(x, y, train, p.lambda_x, p.lambda_y, p.alpha));
    }
  }

  AlsModel m;
  m.x = x.cast<float>();
  m.y = y.cast<float>();
  m.lambda_x = p.lambda_x;
  m.lambda_y = p.lambda_y;
  m.alpha = p.alpha;
  return m;
}

}  // namespace hge
