#pragma once

#include <cstdint>
#include <vector>

#include "hge/types.hpp"

namespace hge {

// Feature-augmented factorization: the item side is y_i plus the embeddings
// of the item's category features (one feature per hierarchy level, so every
// item carries exactly n_levels active features), plus user and item biases.
// Cold items with an untrained y_i still score through their category
// features.
template <class Scalar>
struct HybridMfModelT {
  Mat<Scalar> user_embeddings;     // n_users x d
  Mat<Scalar> item_embeddings;     // n_items x d
  Mat<Scalar> feature_embeddings;  // n_features x d
  Vec<Scalar> user_bias;
  Vec<Scalar> item_bias;
  std::vector<std::vector<std::int32_t>> item_features;  // per item, one per level

  Index n_users() const { return user_embeddings.rows(); }
  Index n_items() const { return item_embeddings.rows(); }
  Index n_features() const { return feature_embeddings.rows(); }
  Index d() const { return user_embeddings.cols(); }
};

using HybridMfModel = HybridMfModelT<float>;

template <class Scalar>
Vec<Scalar> hybrid_item_vector(const HybridMfModelT<Scalar>& m, Index i) {
  Vec<Scalar> v = m.item_embeddings.row(i).transpose();
  for (std::int32_t f : m.item_features[static_cast<std::size_t>(i)]) {
    v += m.feature_embeddings.row(f).transpose();
  }
  return v;
}

template <class Scalar>
Scalar hybrid_score(const HybridMfModelT<Scalar>& m, Index u, Index i) {
  if (u < 0 || u >= m.n_users()) {
    throw DataError("hybrid_score: user index " + std::to_string(u) + " out of range");
  }
  if (i < 0 || i >= m.n_items()) {
    throw DataError("hybrid_score: item index " + std::to_string(i) + " out of range");
  }
  return m.user_embeddings.row(u).dot(hybrid_item_vector(m, i).transpose()) +
         m.user_bias[u] + m.item_bias[i];
}

template <class Scalar>
std::int64_t param_count(const HybridMfModelT<Scalar>& m) {
  return static_cast<std::int64_t>(m.user_embeddings.size()) +
         static_cast<std::int64_t>(m.item_embeddings.size()) +
         static_cast<std::int64_t>(m.feature_embeddings.size()) +
         static_cast<std::int64_t>(m.user_bias.size()) +
         static_cast<std::int64_t>(m.item_bias.size());
}

}  // namespace hge
