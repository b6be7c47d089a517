#pragma once

#include <cstdint>
#include <vector>

#include "hge/split.hpp"
#include "hge/types.hpp"

namespace hge {

struct AlsParams {
  Index d = 32;
  float lambda_x = 0.1f;
  float lambda_y = 0.1f;
  float alpha = 40.0f;
  int iterations = 15;
};

struct AlsModel {
  MatF x;  // users
  MatF y;  // items
  float lambda_x = 0.1f;
  float lambda_y = 0.1f;
  float alpha = 40.0f;
};

inline std::int64_t param_count(const AlsModel& m) {
  return static_cast<std::int64_t>(m.x.size()) + static_cast<std::int64_t>(m.y.size());
}

// Weighted implicit-feedback objective over ALL user-item pairs:
//   sum_{u,i} c_ui (r_ui - x_u.y_i)^2 + lambda_x ||X||^2 + lambda_y ||Y||^2
// with r_ui = 1 and c_ui = 1 + alpha * n_ui on observed pairs (n_ui = event
// multiplicity), and r = 0, c = 1 elsewhere. Evaluated in double via the
// Gram-matrix identity, so it costs O((|U|+|I|) d^2), not |U|*|I|.
double als_objective(const AlsModel& m, const std::vector<IndexedEvent>& train,
                     Index n_users, Index n_items);

// Alternating closed-form ridge solves (users, then items), each half-step
// exact via the rank-correction identity: the dense Gram term Y^T Y is shared
// across users and corrected per observed item. The objective is
// non-increasing after every half-step; if objective_curve is given it
// records [initial, after each half-step...].
AlsModel als_fit(const std::vector<IndexedEvent>& train, Index n_users, Index n_items,
                 const AlsParams& p, std::uint64_t seed, int threads = 1,
                 std::vector<double>* objective_curve = nullptr);

}  // namespace hge
