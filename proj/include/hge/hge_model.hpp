#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "hge/incidence.hpp"
#include "hge/mf.hpp"
#include "hge/numerics.hpp"

namespace hge {

enum class Activation { Relu, LeakyRelu };

// One hierarchy level of category pooling. For a category c with members
// M_c, the layer scores each member j as <w1[c], w2[j]>, pushes the scores
// through the activation, turns them into weights with the gated softmax
// (strictly positive entries only; an all-gated category contributes a zero
// row), and emits the weighted member sum as the output row of every item in
// M_c. Only the convolution term is returned; the skip connection is applied
// by the model stack. The factorized parameterization keeps the layer at
// (n_items + n_categories) * hidden parameters, and computation stays
// per-category — no item-by-item matrix is ever formed.
template <class Scalar>
struct HgeLayerT {
  int level = 1;
  SparseIncidence incidence;
  Mat<Scalar> w1;  // n_categories x hidden
  Mat<Scalar> w2;  // n_items x hidden
  Activation activation = Activation::Relu;
  Scalar leaky_alpha = Scalar(0.01);
  bool skip = true;
  bool masked_softmax = true;

  Index hidden() const { return w1.cols(); }
};

template <class Scalar>
struct HgeModelT {
  MfModelT<Scalar> base;
  std::vector<HgeLayerT<Scalar>> layers;  // strictly increasing by level
};

using HgeLayer = HgeLayerT<float>;
using HgeModel = HgeModelT<float>;

template <class Scalar>
std::int64_t param_count(const HgeLayerT<Scalar>& layer) {
  return static_cast<std::int64_t>(layer.w1.size()) +
         static_cast<std::int64_t>(layer.w2.size());
}

template <class Scalar>
std::int64_t param_count(const HgeModelT<Scalar>& m) {
  std::int64_t n = param_count(m.base);
  for (const auto& layer : m.layers) n += param_count(layer);
  return n;
}

template <class Scalar>
void validate_layer_order(const HgeModelT<Scalar>& m) {
  for (std::size_t l = 1; l < m.layers.size(); ++l) {
    if (m.layers[l].level <= m.layers[l - 1].level) {
      throw ConfigError("layer levels must be strictly increasing");
    }
  }
}

template <class Scalar>
struct HgeLayerCache {
  Vec<Scalar> raw;     // per item: <w1[c(i)], w2[i]>
  Vec<Scalar> act;     // activation(raw)
  Vec<Scalar> weight;  // softmax weight (0 when gated out)
};

template <class Scalar>
Scalar activation_deriv(Activation act, Scalar raw, Scalar alpha) {
  if (act == Activation::Relu) return raw > Scalar(0) ? Scalar(1) : Scalar(0);
  return raw > Scalar(0) ? Scalar(1) : alpha;
}

// Convolution term only (callers add `e` back for the skip path). O(I*(h+d)).
template <class Scalar>
Mat<Scalar> hge_layer_forward(const HgeLayerT<Scalar>& layer, const Mat<Scalar>& e,
                              HgeLayerCache<Scalar>* cache = nullptr) {
  const Index n_items = layer.incidence.n_items();
  if (e.rows() != n_items) {
    throw ShapeError("layer: " + std::to_string(e.rows()) + " embedding rows for " +
                     std::to_string(n_items) + " items");
  }
  if (layer.w2.rows() != n_items) {
    throw ShapeError("layer: w2 has " + std::to_string(layer.w2.rows()) + " rows for " +
                     std::to_string(n_items) + " items");
  }
  if (layer.w1.rows() != layer.incidence.n_categories()) {
    throw ShapeError("layer: w1 has " + std::to_string(layer.w1.rows()) + " rows for " +
                     std::to_string(layer.incidence.n_categories()) + " categories");
  }
  if (layer.w1.cols() != layer.w2.cols()) {
    throw ShapeError("layer: w1/w2 hidden sizes disagree (" + shape_str(layer.w1.rows(), layer.w1.cols()) +
                     " vs " + shape_str(layer.w2.rows(), layer.w2.cols()) + ")");
  }

  Vec<Scalar> raw(n_items);
  for (Index i = 0; i < n_items; ++i) {
    raw[i] = layer.w1.row(layer.incidence.category_of(i)).dot(layer.w2.row(i));
  }
  Vec<Scalar> act(n_items);
  if (layer.activation == Activation::Relu) {
    act = raw.cwiseMax(Scalar(0));
  } else {
    if (!(layer.leaky_alpha > Scalar(0)) || !(layer.leaky_alpha < Scalar(1))) {
      throw ConfigError("layer: leaky_alpha must lie in (0, 1)");
    }
    act = raw.cwiseMax(raw * layer.leaky_alpha);
  }

  Vec<Scalar> weight = act;
  Mat<Scalar> out(n_items, e.cols());
  Vec<Scalar> pooled(e.cols());
  for (Index c = 0; c < layer.incidence.n_categories(); ++c) {
    const auto& members = layer.incidence.members(c);
    // weights over this category's score segment, written back per item
    Vec<Scalar> seg(static_cast<Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) seg[static_cast<Index>(j)] = act[members[j]];
    softmax_weights_inplace<Scalar>(seg, layer.masked_softmax);
    pooled.setZero();
    for (std::size_t j = 0; j < members.size(); ++j) {
      const Scalar w = seg[static_cast<Index>(j)];
      weight[members[j]] = w;
      if (w != Scalar(0)) pooled += w * e.row(members[j]).transpose();
    }
    for (Index i : members) out.row(i) = pooled.transpose();
  }

  if (cache) {
    cache->raw = std::move(raw);
    cache->act = std::move(act);
    cache->weight = std::move(weight);
  }
  return out;
}

template <class Scalar>
struct HgeForwardCache {
  std::vector<Mat<Scalar>> inputs;  // embedding map entering each layer
  std::vector<HgeLayerCache<Scalar>> layers;
};

// Final item embedding map: base embeddings folded through the layer stack,
// adding the input back at every layer that keeps its skip connection.
template <class Scalar>
Mat<Scalar> hge_item_embeddings(const HgeModelT<Scalar>& m,
                                HgeForwardCache<Scalar>* cache = nullptr) {
  Mat<Scalar> e = m.base.item_embeddings;
  if (cache) {
    cache->inputs.clear();
    cache->layers.resize(m.layers.size());
  }
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    if (cache) cache->inputs.push_back(e);
    Mat<Scalar> term =
        hge_layer_forward(m.layers[l], e, cache ? &cache->layers[l] : nullptr);
    if (m.layers[l].skip) {
      e += term;
    } else {
      e = std::move(term);
    }
  }
  return e;
}

template <class Scalar>
Scalar hge_score(const HgeModelT<Scalar>& m, const Mat<Scalar>& item_map, Index u, Index i) {
  if (u < 0 || u >= m.base.n_users()) {
    throw DataError("hge_score: user index " + std::to_string(u) + " out of range");
  }
  if (i < 0 || i >= item_map.rows()) {
    throw DataError("hge_score: item index " + std::to_string(i) + " out of range");
  }
  return m.base.user_embeddings.row(u).dot(item_map.row(i));
}

template <class Scalar>
struct HgeGradients {
  Mat<Scalar> user;
  Mat<Scalar> item;
  std::vector<Mat<Scalar>> w1;
  std::vector<Mat<Scalar>> w2;
  std::vector<char> touched_users;
  std::vector<char> touched_items;                // base embedding rows
  std::vector<std::vector<char>> touched_w1, touched_w2;

  void resize_like(const HgeModelT<Scalar>& m) {
    user.setZero(m.base.n_users(), m.base.d());
    item.setZero(m.base.n_items(), m.base.d());
    w1.resize(m.layers.size());
    w2.resize(m.layers.size());
    touched_w1.resize(m.layers.size());
    touched_w2.resize(m.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      w1[l].setZero(m.layers[l].w1.rows(), m.layers[l].w1.cols());
      w2[l].setZero(m.layers[l].w2.rows(), m.layers[l].w2.cols());
      touched_w1[l].assign(static_cast<std::size_t>(m.layers[l].w1.rows()), 0);
      touched_w2[l].assign(static_cast<std::size_t>(m.layers[l].w2.rows()), 0);
    }
    touched_users.assign(static_cast<std::size_t>(m.base.n_users()), 0);
    touched_items.assign(static_cast<std::size_t>(m.base.n_items()), 0);
  }
};

// Exact gradients for a batch of per-score upstream values dL/ds(u,i).
// The loss side is supplied by the caller; this routes it through the final
// dot products, back through every layer's softmax gating and activation,
// and through the skip connections, filling gradients for user embeddings,
// base item embeddings and every layer's w1/w2. Categories untouched by the
// batch receive exactly zero gradient.
template <class Scalar>
void hge_backward(const HgeModelT<Scalar>& m, const HgeForwardCache<Scalar>& cache,
                  const Mat<Scalar>& item_map,
                  const std::vector<std::tuple<Index, Index, Scalar>>& score_grads,
                  HgeGradients<Scalar>& g) {
  if (cache.inputs.size() != m.layers.size()) {
    throw ShapeError("hge_backward: cache does not match the layer stack");
  }
  const Index n_items = m.base.n_items();
  const Index d = m.base.d();

  Mat<Scalar> de = Mat<Scalar>::Zero(n_items, d);
  for (const auto& [u, i, gs] : score_grads) {
    if (u < 0 || u >= m.base.n_users() || i < 0 || i >= n_items) {
      throw DataError("hge_backward: score gradient index out of range");
    }
    g.user.row(u) += gs * item_map.row(i);
    g.touched_users[static_cast<std::size_t>(u)] = 1;
    de.row(i) += gs * m.base.user_embeddings.row(u);
  }

  const auto row_nonzero = [](const Mat<Scalar>& mat, Index r) {
    for (Index k = 0; k < mat.cols(); ++k) {
      if (mat(r, k) != Scalar(0)) return true;
    }
    return false;
  };

  Vec<Scalar> cat_sum(d);
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    const HgeLayerT<Scalar>& layer = m.layers[l];
    const HgeLayerCache<Scalar>& lc = cache.layers[l];
    const Mat<Scalar>& ein = cache.inputs[l];
    Mat<Scalar> de_in = layer.skip ? de : Mat<Scalar>::Zero(n_items, d);

    for (Index c = 0; c < layer.incidence.n_categories(); ++c) {
      const auto& members = layer.incidence.members(c);

      cat_sum.setZero();
      bool touched = false;
      for (Index i : members) {
        if (row_nonzero(de, i)) {
          cat_sum += de.row(i).transpose();
          touched = true;
        }
      }
      if (!touched) continue;

      // out_c = sum_j a_j * ein[j]; a = softmax over the active set
      Scalar dot_aw = Scalar(0);  // sum_k a_k * dL/da_k
      for (Index j : members) {
        const Scalar a = lc.weight[j];
        if (a != Scalar(0)) dot_aw += a * cat_sum.dot(ein.row(j).transpose());
      }
      bool cat_has_grad = false;
      for (Index j : members) {
        const Scalar a = lc.weight[j];
        if (a == Scalar(0)) continue;
        const Scalar da = cat_sum.dot(ein.row(j).transpose());
        const Scalar dz = a * (da - dot_aw);
        const Scalar ds = dz * activation_deriv(layer.activation, lc.raw[j], layer.leaky_alpha);
        if (ds != Scalar(0)) {
          g.w1[l].row(c) += ds * layer.w2.row(j);
          g.w2[l].row(j) += ds * layer.w1.row(c);
          g.touched_w2[l][static_cast<std::size_t>(j)] = 1;
          cat_has_grad = true;
        }
        de_in.row(j) += a * cat_sum.transpose();
      }
      if (cat_has_grad) g.touched_w1[l][static_cast<std::size_t>(c)] = 1;
    }
    de = std::move(de_in);
  }

  for (Index i = 0; i < n_items; ++i) {
    if (row_nonzero(de, i)) {
      g.item.row(i) += de.row(i);
      g.touched_items[static_cast<std::size_t>(i)] = 1;
    }
  }
}

}  // namespace hge
