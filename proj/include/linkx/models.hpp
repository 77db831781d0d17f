#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkx/graph.hpp"
#include "linkx/matrix.hpp"
#include "linkx/rng.hpp"

namespace linkx {

// ---------------------------------------------------------------------------
// Layers and parameter plumbing
// ---------------------------------------------------------------------------

struct Linear {
  DenseMatrix w;  // out x in
  DenseMatrix b;  // out x 1; empty when the layer has no bias
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) for weights and bias.
inline Linear init_linear(std::int64_t out, std::int64_t in, bool bias, Rng& rng) {
  Linear l;
  l.w = DenseMatrix(out, in);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::int64_t>(in, 1)));
  for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = rng.uniform_range(-bound, bound);
  if (bias) {
    l.b = DenseMatrix(out, 1);
    for (std::size_t i = 0; i < l.b.size(); ++i) l.b.data()[i] = rng.uniform_range(-bound, bound);
  }
  return l;
}

// Named view of one trainable tensor. Weight decay applies only where
// `decay` is set (biases are excluded).
struct ParamRef {
  std::string name;
  DenseMatrix* value = nullptr;
  bool decay = true;
};

inline void append_layer_params(std::vector<ParamRef>& out, std::vector<Linear>& layers,
                                const std::string& prefix) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back({prefix + "." + std::to_string(i) + ".w", &layers[i].w, true});
    if (!layers[i].b.empty())
      out.push_back({prefix + "." + std::to_string(i) + ".b", &layers[i].b, false});
  }
}

// ---------------------------------------------------------------------------
// Batches: a set of nodes with the corresponding adjacency columns and/or
// feature columns. The adjacency slice is kept in both orientations so that
// the sparse products in forward and backward both run through spmm.
// ---------------------------------------------------------------------------

struct NodeBatch {
  std::vector<std::int32_t> nodes;   // ascending
  std::vector<std::int32_t> labels;  // aligned with nodes
  SparseMatrix adj_cols;             // n x b
  SparseMatrix adj_cols_t;           // b x n
  DenseMatrix features;              // D x b
  bool has_adjacency = false;
  bool has_features = false;
};

inline NodeBatch make_batch(const Dataset& data, std::span<const std::int32_t> nodes,
                            bool need_adjacency, const DenseMatrix* feature_source) {
  NodeBatch batch;
  batch.nodes.assign(nodes.begin(), nodes.end());
  batch.labels.reserve(nodes.size());
  for (std::int32_t u : nodes) batch.labels.push_back(data.labels.values[u]);
  if (need_adjacency) {
    batch.adj_cols = adjacency_columns(data.graph, nodes);
    batch.adj_cols_t = transpose(batch.adj_cols);
    batch.has_adjacency = true;
  }
  if (feature_source != nullptr) {
    batch.features = DenseMatrix(feature_source->rows(), static_cast<std::int64_t>(nodes.size()));
    for (std::int64_t d = 0; d < feature_source->rows(); ++d) {
      const double* src = feature_source->row(d);
      double* dst = batch.features.row(d);
      for (std::size_t j = 0; j < nodes.size(); ++j) dst[j] = src[nodes[j]];
    }
    batch.has_features = true;
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Sparse-input linear algebra. A layer whose input is an n x b adjacency
// slice computes W * S through spmm on the transposed slice; the weight
// gradient dW = upstream * S^T runs through spmm on the original slice.
// ---------------------------------------------------------------------------

inline DenseMatrix sparse_linear_forward(const DenseMatrix& w, const DenseMatrix& b,
                                         const SparseMatrix& cols_t) {
  DenseMatrix z = transpose(spmm(cols_t, transpose(w)));  // out x b
  if (!b.empty()) {
    for (std::int64_t o = 0; o < z.rows(); ++o) {
      double* zr = z.row(o);
      const double bo = b(o, 0);
      for (std::int64_t j = 0; j < z.cols(); ++j) zr[j] += bo;
    }
  }
  return z;
}

inline DenseMatrix sparse_linear_weight_grad(const SparseMatrix& cols, const DenseMatrix& upstream) {
  return transpose(spmm(cols, transpose(upstream)));  // out x n
}

inline DenseMatrix bias_grad(const DenseMatrix& upstream) {
  DenseMatrix db(upstream.rows(), 1);
  for (std::int64_t o = 0; o < upstream.rows(); ++o) {
    const double* u = upstream.row(o);
    double acc = 0.0;
    for (std::int64_t j = 0; j < upstream.cols(); ++j) acc += u[j];
    db(o, 0) = acc;
  }
  return db;
}

// ---------------------------------------------------------------------------
// Dense MLP chain: linear layers with ReLU between them, none after the last.
// ---------------------------------------------------------------------------

struct MlpCache {
  std::vector<DenseMatrix> inputs;  // input to each layer
  std::vector<DenseMatrix> pre;     // pre-activation of each layer
};

inline DenseMatrix mlp_chain_forward(std::span<const Linear> layers, const DenseMatrix& x,
                                     MlpCache* cache) {
  DenseMatrix a = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    DenseMatrix z = linear_forward(layers[i].w, layers[i].b, a);
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(z);
    }
    a = i + 1 < layers.size() ? relu(z) : std::move(z);
  }
  return a;
}

// Walks the chain backwards, appending gradients (w then b per layer) to
// `grads` in params() order. Returns the gradient w.r.t. the chain input
// when requested.
inline DenseMatrix mlp_chain_backward(std::span<const Linear> layers, const MlpCache& cache,
                                      const DenseMatrix& upstream, bool need_input_grad,
                                      std::vector<DenseMatrix>& grads) {
  const std::size_t m = layers.size();
  std::vector<DenseMatrix> layer_grads(2 * m);
  DenseMatrix dz = upstream;
  for (std::size_t i = m; i-- > 0;) {
    const bool need_dx = i > 0 || need_input_grad;
    LinearGrads g = linear_backward(layers[i].w, cache.inputs[i], dz, !layers[i].b.empty(), need_dx);
    layer_grads[2 * i] = std::move(g.dw);
    layer_grads[2 * i + 1] = std::move(g.db);
    if (i > 0) dz = relu_backward(cache.pre[i - 1], g.dx);
    else if (need_input_grad) dz = std::move(g.dx);
  }
  for (std::size_t i = 0; i < m; ++i) {
    grads.push_back(std::move(layer_grads[2 * i]));
    if (!layers[i].b.empty()) grads.push_back(std::move(layer_grads[2 * i + 1]));
  }
  return need_input_grad ? std::move(dz) : DenseMatrix();
}

// Layer dims for an in -> hidden -> ... -> out chain with `count` layers.
inline std::vector<Linear> init_mlp_chain(std::int64_t in, std::int64_t hidden, std::int64_t out,
                                          int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("mlp chain needs at least one layer");
  std::vector<Linear> layers;
  for (int i = 0; i < count; ++i) {
    const std::int64_t li = i == 0 ? in : hidden;
    const std::int64_t lo = i == count - 1 ? out : hidden;
    layers.push_back(init_linear(lo, li, /*bias=*/true, rng));
  }
  return layers;
}

// ---------------------------------------------------------------------------
// MLP on node features
// ---------------------------------------------------------------------------

struct MlpModel {
  std::vector<Linear> layers;

  static MlpModel init(std::int64_t in, std::int64_t hidden, std::int64_t out, int count, Rng& rng) {
    return MlpModel{init_mlp_chain(in, hidden, out, count, rng)};
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    append_layer_params(out, layers, "mlp");
    return out;
  }

  DenseMatrix forward(const DenseMatrix& x, MlpCache* cache = nullptr) const {
    return mlp_chain_forward(layers, x, cache);
  }

  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& batch) const {
    MlpCache cache;
    DenseMatrix logits = mlp_chain_forward(layers, batch.features, &cache);
    auto sx = softmax_xent(logits, batch.labels);
    std::vector<DenseMatrix> grads;
    mlp_chain_backward(layers, cache, sx.grad, false, grads);
    return {sx.loss, std::move(grads)};
  }
};

inline DenseMatrix mlp_forward(const MlpModel& model, const DenseMatrix& x) {
  return model.forward(x);
}

// ---------------------------------------------------------------------------
// LINK: logistic regression on adjacency columns. No bias by default; the
// logit of class k for node u is the sum of W_{kv} over u's neighbors.
// ---------------------------------------------------------------------------

struct LinkModel {
  Linear layer;  // w: C x n

  static LinkModel init(std::int64_t n, std::int64_t classes, bool bias, Rng& rng) {
    return LinkModel{init_linear(classes, n, bias, rng)};
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    out.push_back({"link.w", &layer.w, true});
    if (!layer.b.empty()) out.push_back({"link.b", &layer.b, false});
    return out;
  }

  DenseMatrix forward(const NodeBatch& batch) const {
    return sparse_linear_forward(layer.w, layer.b, batch.adj_cols_t);
  }

  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& batch) const {
    DenseMatrix logits = forward(batch);
    auto sx = softmax_xent(logits, batch.labels);
    std::vector<DenseMatrix> grads;
    grads.push_back(sparse_linear_weight_grad(batch.adj_cols, sx.grad));
    if (!layer.b.empty()) grads.push_back(bias_grad(sx.grad));
    return {sx.loss, std::move(grads)};
  }
};

// Columns of A are sliced for `nodes`, then multiplied through spmm.
inline DenseMatrix link_forward(const DenseMatrix& w, const Graph& g,
                                std::span<const std::int32_t> nodes) {
  if (w.cols() != g.n) throw std::invalid_argument("link_forward: W columns != node count");
  SparseMatrix cols_t = transpose(adjacency_columns(g, nodes));
  return transpose(spmm(cols_t, transpose(w)));
}

// ---------------------------------------------------------------------------
// LINKX: separate embeddings of adjacency and features, mixed by a linear
// map over their concatenation with additive skip connections, then a final
// MLP head:
//
//   hA = MLP_A(A),  hX = MLP_X(X)
//   Y  = MLP_f(relu(W_mix [hA; hX] + hA + hX))
//
// MLP_A's first layer consumes the sparse adjacency slice through spmm; the
// remaining layers cost O(d^2) per node regardless of |E|.
// ---------------------------------------------------------------------------

struct LinkxModel {
  std::vector<Linear> mlp_a;  // n -> d
  std::vector<Linear> mlp_x;  // D -> d
  DenseMatrix w_mix;          // d x 2d, no bias
  std::vector<Linear> mlp_f;  // d -> C

  static LinkxModel init(std::int64_t n, std::int64_t feat_dim, std::int64_t classes,
                         std::int64_t hidden, int head_layers, Rng& rng, int embed_layers = 1) {
    if (hidden < 1) throw std::invalid_argument("linkx: hidden dim must be positive");
    LinkxModel m;
    m.mlp_a = init_mlp_chain(n, hidden, hidden, embed_layers, rng);
    m.mlp_x = init_mlp_chain(feat_dim, hidden, hidden, embed_layers, rng);
    m.w_mix = DenseMatrix(hidden, 2 * hidden);
    const double bound = 1.0 / std::sqrt(static_cast<double>(2 * hidden));
    for (std::size_t i = 0; i < m.w_mix.size(); ++i)
      m.w_mix.data()[i] = rng.uniform_range(-bound, bound);
    m.mlp_f = init_mlp_chain(hidden, hidden, classes, head_layers, rng);
    return m;
  }

  std::int64_t hidden_dim() const { return w_mix.rows(); }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    append_layer_params(out, mlp_a, "mlp_a");
    append_layer_params(out, mlp_x, "mlp_x");
    out.push_back({"w_mix", &w_mix, true});
    append_layer_params(out, mlp_f, "mlp_f");
    return out;
  }

  struct Cache {
    MlpCache a_tail;       // caches for mlp_a layers after the first
    DenseMatrix a_pre0;    // pre-activation of the sparse first layer
    MlpCache x_chain;
    DenseMatrix h_a, h_x;
    DenseMatrix cat, mix_pre;
    MlpCache f_chain;
  };

  DenseMatrix forward(const NodeBatch& batch, Cache* cache = nullptr) const {
    // MLP_A: sparse first layer, dense remainder.
    DenseMatrix a0 = sparse_linear_forward(mlp_a[0].w, mlp_a[0].b, batch.adj_cols_t);
    if (cache) cache->a_pre0 = a0;
    DenseMatrix h_a;
    if (mlp_a.size() > 1) {
      DenseMatrix a_act = relu(a0);
      h_a = mlp_chain_forward(std::span<const Linear>(mlp_a).subspan(1), a_act,
                              cache ? &cache->a_tail : nullptr);
    } else {
      h_a = std::move(a0);
    }
    DenseMatrix h_x = mlp_chain_forward(mlp_x, batch.features, cache ? &cache->x_chain : nullptr);

    const std::int64_t d = hidden_dim();
    const std::int64_t b = h_a.cols();
    DenseMatrix cat(2 * d, b);
    for (std::int64_t r = 0; r < d; ++r) {
      std::copy(h_a.row(r), h_a.row(r) + b, cat.row(r));
      std::copy(h_x.row(r), h_x.row(r) + b, cat.row(r + d));
    }
    DenseMatrix pre = linear_forward(w_mix, DenseMatrix(), cat);
    for (std::size_t i = 0; i < pre.size(); ++i)
      pre.data()[i] += h_a.data()[i] + h_x.data()[i];
    DenseMatrix mixed = relu(pre);
    if (cache) {
      cache->h_a = std::move(h_a);
      cache->h_x = std::move(h_x);
      cache->cat = std::move(cat);
      cache->mix_pre = std::move(pre);
    }
    return mlp_chain_forward(mlp_f, mixed, cache ? &cache->f_chain : nullptr);
  }

  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& batch) const {
    Cache cache;
    DenseMatrix logits = forward(batch, &cache);
    auto sx = softmax_xent(logits, batch.labels);

    std::vector<DenseMatrix> f_grads;
    DenseMatrix d_mixed = mlp_chain_backward(mlp_f, cache.f_chain, sx.grad, true, f_grads);
    DenseMatrix d_pre = relu_backward(cache.mix_pre, d_mixed);

    LinearGrads mix = linear_backward(w_mix, cache.cat, d_pre, false, true);
    const std::int64_t d = hidden_dim();
    const std::int64_t b = d_pre.cols();
    DenseMatrix d_ha(d, b), d_hx(d, b);
    for (std::int64_t r = 0; r < d; ++r) {
      const double* dc_a = mix.dx.row(r);
      const double* dc_x = mix.dx.row(r + d);
      const double* dp = d_pre.row(r);
      double* da = d_ha.row(r);
      double* dxr = d_hx.row(r);
      for (std::int64_t j = 0; j < b; ++j) {
        da[j] = dc_a[j] + dp[j];  // skip connection adds d_pre back
        dxr[j] = dc_x[j] + dp[j];
      }
    }

    std::vector<DenseMatrix> a_grads;
    DenseMatrix d_a0;
    if (mlp_a.size() > 1) {
      DenseMatrix d_act = mlp_chain_backward(std::span<const Linear>(mlp_a).subspan(1),
                                             cache.a_tail, d_ha, true, a_grads);
      d_a0 = relu_backward(cache.a_pre0, d_act);
    } else {
      d_a0 = std::move(d_ha);
    }
    DenseMatrix d_wa0 = sparse_linear_weight_grad(batch.adj_cols, d_a0);
    DenseMatrix d_ba0 = mlp_a[0].b.empty() ? DenseMatrix() : bias_grad(d_a0);

    std::vector<DenseMatrix> x_grads;
    mlp_chain_backward(mlp_x, cache.x_chain, d_hx, false, x_grads);

    // params() order: mlp_a, mlp_x, w_mix, mlp_f
    std::vector<DenseMatrix> grads;
    grads.push_back(std::move(d_wa0));
    if (!mlp_a[0].b.empty()) grads.push_back(std::move(d_ba0));
    for (auto& g : a_grads) grads.push_back(std::move(g));
    for (auto& g : x_grads) grads.push_back(std::move(g));
    grads.push_back(std::move(mix.dw));
    for (auto& g : f_grads) grads.push_back(std::move(g));
    return {sx.loss, std::move(grads)};
  }
};

inline DenseMatrix linkx_forward(const LinkxModel& model, const SparseMatrix& adj_cols,
                                 const DenseMatrix& feature_cols) {
  NodeBatch batch;
  batch.adj_cols = adj_cols;
  batch.adj_cols_t = transpose(adj_cols);
  batch.features = feature_cols;
  batch.has_adjacency = true;
  batch.has_features = true;
  return model.forward(batch);
}

// ---------------------------------------------------------------------------
// Concatenation ablation: one MLP over the vertical concatenation [A; X].
// The first layer is stored as an adjacency block and a feature block so the
// adjacency half still goes through spmm.
// ---------------------------------------------------------------------------

struct ConcatMlpModel {
  DenseMatrix first_wa;       // h x n
  DenseMatrix first_wx;       // h x D
  DenseMatrix first_b;        // h x 1
  std::vector<Linear> rest;   // h -> C when layers > 1

  static ConcatMlpModel init(std::int64_t n, std::int64_t feat_dim, std::int64_t classes,
                             std::int64_t hidden, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("concat mlp needs at least one layer");
    ConcatMlpModel m;
    const std::int64_t first_out = count == 1 ? classes : hidden;
    Linear first = init_linear(first_out, n + feat_dim, true, rng);
    m.first_wa = DenseMatrix(first_out, n);
    m.first_wx = DenseMatrix(first_out, feat_dim);
    for (std::int64_t o = 0; o < first_out; ++o) {
      for (std::int64_t i = 0; i < n; ++i) m.first_wa(o, i) = first.w(o, i);
      for (std::int64_t i = 0; i < feat_dim; ++i) m.first_wx(o, i) = first.w(o, n + i);
    }
    m.first_b = std::move(first.b);
    if (count > 1) m.rest = init_mlp_chain(hidden, hidden, classes, count - 1, rng);
    return m;
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    out.push_back({"first.wa", &first_wa, true});
    if (!first_wx.empty()) out.push_back({"first.wx", &first_wx, true});
    out.push_back({"first.b", &first_b, false});
    append_layer_params(out, rest, "rest");
    return out;
  }

  struct Cache {
    DenseMatrix pre0;
    MlpCache tail;
  };

  DenseMatrix forward(const NodeBatch& batch, Cache* cache = nullptr) const {
    DenseMatrix z = sparse_linear_forward(first_wa, first_b, batch.adj_cols_t);
    if (!first_wx.empty()) {
      DenseMatrix zx = linear_forward(first_wx, DenseMatrix(), batch.features);
      for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] += zx.data()[i];
    }
    if (cache) cache->pre0 = z;
    if (rest.empty()) return z;
    DenseMatrix act = relu(z);
    return mlp_chain_forward(rest, act, cache ? &cache->tail : nullptr);
  }

  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& batch) const {
    Cache cache;
    DenseMatrix logits = forward(batch, &cache);
    auto sx = softmax_xent(logits, batch.labels);
    std::vector<DenseMatrix> tail_grads;
    DenseMatrix d_z;
    if (!rest.empty()) {
      DenseMatrix d_act = mlp_chain_backward(rest, cache.tail, sx.grad, true, tail_grads);
      d_z = relu_backward(cache.pre0, d_act);
    } else {
      d_z = sx.grad;
    }
    std::vector<DenseMatrix> grads;
    grads.push_back(sparse_linear_weight_grad(batch.adj_cols, d_z));
    if (!first_wx.empty()) {
      LinearGrads gx = linear_backward(first_wx, batch.features, d_z, false, false);
      grads.push_back(std::move(gx.dw));
    }
    grads.push_back(bias_grad(d_z));
    for (auto& g : tail_grads) grads.push_back(std::move(g));
    return {sx.loss, std::move(grads)};
  }
};

inline DenseMatrix concat_mlp_forward(const ConcatMlpModel& model, const SparseMatrix& adj_cols,
                                      const DenseMatrix& feature_cols) {
  NodeBatch batch;
  batch.adj_cols = adj_cols;
  batch.adj_cols_t = transpose(adj_cols);
  batch.features = feature_cols;
  batch.has_adjacency = true;
  batch.has_features = true;
  return model.forward(batch);
}

// ---------------------------------------------------------------------------
// Label propagation and SGC propagation
// ---------------------------------------------------------------------------

enum class PropNorm { sym, row };

struct PropagationConfig {
  double alpha = 0.9;
  int hops = 1;
  int iterations = 50;
  PropNorm normalization = PropNorm::sym;
};

// Degree-normalized adjacency; self-loops optionally added before
// normalization. Degrees are clamped to >= 1 so directed corner cases stay
// finite (a no-op for undirected storage).
inline SparseMatrix normalized_adjacency(const Graph& g, PropNorm norm, bool self_loops) {
  SparseMatrix s;
  s.rows = g.n;
  s.cols = g.n;
  s.offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
  std::vector<double> inv_deg(static_cast<std::size_t>(g.n));
  for (std::int32_t u = 0; u < g.n; ++u) {
    double d = static_cast<double>(g.row_offsets[u + 1] - g.row_offsets[u]) + (self_loops ? 1.0 : 0.0);
    inv_deg[static_cast<std::size_t>(u)] = 1.0 / std::max(d, 1.0);
  }
  for (std::int32_t u = 0; u < g.n; ++u) {
    auto nbrs = g.neighbors(u);
    bool loop_placed = !self_loops;
    auto push = [&](std::int32_t v) {
      double value;
      if (norm == PropNorm::row) {
        value = inv_deg[static_cast<std::size_t>(u)];
      } else {
        value = std::sqrt(inv_deg[static_cast<std::size_t>(u)]) *
                std::sqrt(inv_deg[static_cast<std::size_t>(v)]);
      }
      s.indices.push_back(v);
      s.values.push_back(value);
    };
    for (std::int32_t v : nbrs) {
      if (!loop_placed && v > u) {
        push(u);
        loop_placed = true;
      }
      push(v);
    }
    if (!loop_placed) push(u);
    s.offsets[static_cast<std::size_t>(u) + 1] = static_cast<std::int64_t>(s.indices.size());
  }
  return s;
}

// Iterates Y <- alpha * S^hops * Y + (1 - alpha) * Y0 from one-hot seed
// labels (unlabeled nodes start at zero), then renormalizes each node's
// distribution. Nodes that never receive mass keep a zero column; with
// alpha = 0 the output is exactly the seed matrix. Input labels use -1 for
// unlabeled nodes. Returns soft labels as C x n (one column per node).
inline DenseMatrix label_propagation(const Graph& g, std::span<const std::int32_t> partial_labels,
                                     std::int32_t num_classes, const PropagationConfig& cfg) {
  if (static_cast<std::int32_t>(partial_labels.size()) != g.n)
    throw std::invalid_argument("label_propagation: label length != node count");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw std::invalid_argument("label_propagation: alpha in [0,1]");
  if (cfg.hops != 1 && cfg.hops != 2) throw std::invalid_argument("label_propagation: hops must be 1 or 2");
  if (cfg.iterations < 1) throw std::invalid_argument("label_propagation: iterations must be >= 1");
  bool any_labeled = false;
  for (std::int32_t k : partial_labels) {
    if (k >= num_classes) throw std::invalid_argument("label_propagation: label out of range");
    any_labeled |= k >= 0;
  }
  if (!any_labeled) throw std::invalid_argument("label_propagation: no labeled nodes");

  SparseMatrix s = normalized_adjacency(g, cfg.normalization, /*self_loops=*/false);
  DenseMatrix y0(g.n, num_classes);
  for (std::int32_t u = 0; u < g.n; ++u)
    if (partial_labels[u] >= 0) y0(u, partial_labels[u]) = 1.0;

  DenseMatrix y = y0;
  for (int it = 0; it < cfg.iterations; ++it) {
    DenseMatrix t = spmm(s, y);
    if (cfg.hops == 2) t = spmm(s, t);
    for (std::size_t i = 0; i < y.size(); ++i)
      y.data()[i] = cfg.alpha * t.data()[i] + (1.0 - cfg.alpha) * y0.data()[i];
  }

  DenseMatrix out(num_classes, g.n);
  for (std::int32_t u = 0; u < g.n; ++u) {
    double total = 0.0;
    for (std::int32_t k = 0; k < num_classes; ++k) total += y(u, k);
    if (total > 0.0)
      for (std::int32_t k = 0; k < num_classes; ++k) out(k, u) = y(u, k) / total;
  }
  return out;
}

// S^hops * X with S the symmetric-normalized adjacency with self-loops.
// Features are D x n; propagation is precomputed once and reused.
inline DenseMatrix sgc_propagate(const Graph& g, const DenseMatrix& x, int hops) {
  if (x.cols() != g.n) throw std::invalid_argument("sgc_propagate: feature columns != node count");
  if (hops < 1 || hops > 2) throw std::invalid_argument("sgc_propagate: hops must be 1 or 2");
  SparseMatrix s = normalized_adjacency(g, PropNorm::sym, /*self_loops=*/true);
  DenseMatrix xt = transpose(x);  // n x D
  for (int h = 0; h < hops; ++h) xt = spmm(s, xt);
  return transpose(xt);
}

inline DenseMatrix sgc_logits(const Graph& g, const DenseMatrix& x, const Linear& w, int hops) {
  DenseMatrix propagated = sgc_propagate(g, x, hops);
  return linear_forward(w.w, w.b, propagated);
}

}  // namespace linkx
