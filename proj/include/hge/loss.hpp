#pragma once

#include <cmath>
#include <vector>

#include "hge/types.hpp"

namespace hge {

template <class Scalar>
struct LossResult {
  double loss = 0.0;                // mean over elements
  std::vector<Scalar> grad;         // dLoss/dLogit per element
};

namespace detail {
inline double softplus(double x) {
  // log(1 + e^x) without overflow on either tail
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
}  // namespace detail

// Mean binary cross-entropy straight from logits:
//   loss_k = softplus(-(2 y_k - 1) z_k),  d loss / d z_k = (sigmoid(z_k) - y_k) / n
// The softplus form never materializes probabilities, so extreme logits in
// either direction stay finite.
template <class Scalar>
LossResult<Scalar> bce_with_logits(const std::vector<Scalar>& logits,
                                   const std::vector<int>& labels) {
  if (logits.size() != labels.size()) {
    throw ShapeError("bce_with_logits: " + std::to_string(logits.size()) + " logits vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (logits.empty()) throw ShapeError("bce_with_logits: empty input");
  const double n = static_cast<double>(logits.size());
  LossResult<Scalar> out;
  out.grad.resize(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const int y = labels[k];
    if (y != 0 && y != 1) throw DataError("bce_with_logits: labels must be 0 or 1");
    const double z = static_cast<double>(logits[k]);
    total += detail::softplus(-(2.0 * y - 1.0) * z);
    out.grad[k] = static_cast<Scalar>((detail::sigmoid(z) - static_cast<double>(y)) / n);
  }
  out.loss = total / n;
  return out;
}

// Pairwise ranking loss from positive-minus-negative score differences:
//   loss_k = softplus(-diff_k),  d loss / d diff_k = -sigmoid(-diff_k) / n
// The caller routes +grad to the positive score and -grad to the negative.
template <class Scalar>
LossResult<Scalar> bpr_from_diffs(const std::vector<Scalar>& diffs) {
  if (diffs.empty()) throw ShapeError("bpr_from_diffs: empty input");
  const double n = static_cast<double>(diffs.size());
  LossResult<Scalar> out;
  out.grad.resize(diffs.size());
  double total = 0.0;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    const double diff = static_cast<double>(diffs[k]);
    total += detail::softplus(-diff);
    out.grad[k] = static_cast<Scalar>(-detail::sigmoid(-diff) / n);
  }
  out.loss = total / n;
  return out;
}

}  // namespace hge
