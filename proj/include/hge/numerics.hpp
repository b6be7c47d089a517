#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hge/types.hpp"

namespace hge {

// Checked product. Eigen's single-threaded kernel is deterministic for a
// fixed build, which is what downstream reproducibility relies on.
template <class Scalar>
Mat<Scalar> matmul(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.rows(), a.cols()) +
                     " * " + shape_str(b.rows(), b.cols()));
  }
  return a * b;
}

template <class Scalar>
Mat<Scalar> relu(const Mat<Scalar>& a) {
  return a.cwiseMax(Scalar(0));
}

// max(alpha*x, x), alpha in (0, 1)
template <class Scalar>
Mat<Scalar> leaky_relu(const Mat<Scalar>& a, Scalar alpha) {
  if (!(alpha > Scalar(0)) || !(alpha < Scalar(1))) {
    throw ConfigError("leaky_relu: alpha must lie in (0, 1), got " +
                      std::to_string(static_cast<double>(alpha)));
  }
  return a.cwiseMax(a * alpha);
}

// Softmax over a score segment, in place. When `gated` is set only strictly
// positive entries participate; the rest get weight exactly 0, and an empty
// active set yields an all-zero segment rather than NaN or a uniform row.
// Max-subtraction keeps the exponentials in range.
template <class Scalar>
void softmax_weights_inplace(Eigen::Ref<Vec<Scalar>> s, bool gated) {
  const Index n = s.size();
  Scalar mx = -std::numeric_limits<Scalar>::infinity();
  bool any = false;
  for (Index i = 0; i < n; ++i) {
    if (!gated || s[i] > Scalar(0)) {
      any = true;
      mx = std::max(mx, s[i]);
    }
  }
  if (!any) {
    s.setZero();
    return;
  }
  Scalar sum = Scalar(0);
  for (Index i = 0; i < n; ++i) {
    if (!gated || s[i] > Scalar(0)) {
      s[i] = std::exp(s[i] - mx);
      sum += s[i];
    } else {
      s[i] = Scalar(0);
    }
  }
  s /= sum;
}

// Row-wise gated softmax restricted to per-row support sets. Entries outside
// the support, and supported entries whose score is not strictly positive,
// get weight 0. Rows whose active set is empty come back all-zero.
template <class Scalar>
Mat<Scalar> gated_row_softmax(const Mat<Scalar>& scores,
                              const std::vector<std::vector<Index>>& support) {
  if (static_cast<Index>(support.size()) != scores.rows()) {
    throw ShapeError("gated_row_softmax: " + std::to_string(support.size()) +
                     " support sets for " + std::to_string(scores.rows()) + " rows");
  }
  Mat<Scalar> out = Mat<Scalar>::Zero(scores.rows(), scores.cols());
  Vec<Scalar> seg;
  for (Index r = 0; r < scores.rows(); ++r) {
    const auto& idx = support[r];
    seg.resize(static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (idx[j] < 0 || idx[j] >= scores.cols()) {
        throw ShapeError("gated_row_softmax: support index " + std::to_string(idx[j]) +
                         " outside row of width " + std::to_string(scores.cols()));
      }
      seg[static_cast<Index>(j)] = scores(r, idx[j]);
    }
    softmax_weights_inplace<Scalar>(seg, /*gated=*/true);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      out(r, idx[j]) = seg[static_cast<Index>(j)];
    }
  }
  return out;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  Index worst_row = 0;
  Index worst_col = 0;
  bool passed = false;
};

// Central differences against an analytic gradient. Relative error uses
// max(|analytic|, |numeric|, 1e-8) as denominator so near-zero entries do
// not blow up the report. Evaluation happens in double.
inline GradCheckReport finite_diff_check(const std::function<double(const MatD&)>& forward,
                                         const MatD& analytic_grad, const MatD& point,
                                         double eps, double tolerance = 1e-4) {
  if (!(eps > 0.0)) {
    throw ConfigError("finite_diff_check: eps must be positive");
  }
  if (analytic_grad.rows() != point.rows() || analytic_grad.cols() != point.cols()) {
    throw ShapeError("finite_diff_check: gradient " +
                     shape_str(analytic_grad.rows(), analytic_grad.cols()) +
                     " vs point " + shape_str(point.rows(), point.cols()));
  }
  GradCheckReport rep;
  MatD x = point;
  for (Index r = 0; r < point.rows(); ++r) {
    for (Index c = 0; c < point.cols(); ++c) {
      x(r, c) = point(r, c) + eps;
      const double fp = forward(x);
      x(r, c) = point(r, c) - eps;
      const double fm = forward(x);
      x(r, c) = point(r, c);
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("finite_diff_check: non-finite forward value at (" +
                           std::to_string(r) + "," + std::to_string(c) + ")");
      }
      const double numeric = (fp - fm) / (2.0 * eps);
      const double analytic = analytic_grad(r, c);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(numeric - analytic) / denom;
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_row = r;
        rep.worst_col = c;
      }
    }
  }
  rep.passed = rep.max_rel_error < tolerance;
  return rep;
}

}  // namespace hge
