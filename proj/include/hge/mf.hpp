#pragma once

#include <cstdint>

#include "hge/types.hpp"

namespace hge {

template <class Scalar>
struct MfModelT {
  Mat<Scalar> user_embeddings;  // n_users x d
  Mat<Scalar> item_embeddings;  // n_items x d

  Index n_users() const { return user_embeddings.rows(); }
  Index n_items() const { return item_embeddings.rows(); }
  Index d() const { return user_embeddings.cols(); }
};

using MfModel = MfModelT<float>;

template <class Scalar>
Scalar mf_score(const MfModelT<Scalar>& m, Index u, Index i) {
  if (u < 0 || u >= m.n_users()) {
    throw DataError("mf_score: user index " + std::to_string(u) + " out of range");
  }
  if (i < 0 || i >= m.n_items()) {
    throw DataError("mf_score: item index " + std::to_string(i) + " out of range");
  }
  return m.user_embeddings.row(u).dot(m.item_embeddings.row(i));
}

template <class Scalar>
std::int64_t param_count(const MfModelT<Scalar>& m) {
  return static_cast<std::int64_t>(m.user_embeddings.size()) +
         static_cast<std::int64_t>(m.item_embeddings.size());
}

}  // namespace hge
