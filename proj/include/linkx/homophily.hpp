#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "linkx/graph.hpp"
#include "linkx/rng.hpp"

namespace linkx {

// Label-topology diagnostics. All metrics are computed over the stored
// directed entries: undirected graphs store both directions, which counts
// every edge twice in numerator and denominator alike and leaves each ratio
// unchanged. Isolated nodes (out-degree zero) are excluded from node-level
// averages and from class denominators, and the null-model class fractions
// are taken over the non-isolated subgraph so the improved measure stays
// internally consistent.

// C x C row-stochastic class-mixing matrix. Rows for classes with no
// outgoing edges are zero and masked.
struct CompatibilityMatrix {
  DenseMatrix values;
  std::vector<bool> zero_row_mask;
};

struct HomophilyReport {
  double edge_homophily = 0.0;
  double node_homophily = 0.0;
  std::optional<double> improved;      // empty iff num_classes == 1
  std::vector<double> class_wise;      // h_k; NaN where masked
  std::vector<double> class_fractions; // |C_k| / n over non-isolated nodes
  std::vector<std::int32_t> masked_classes;
  std::int32_t isolated_nodes = 0;
  std::int32_t num_classes = 0;
};

namespace detail {

struct ClassEdgeStats {
  std::vector<std::int64_t> same_degree;   // sum over class members of d_u^(k_u)
  std::vector<std::int64_t> total_degree;  // sum over class members of d_u
  std::vector<std::int64_t> class_size;    // non-isolated members per class
  std::int64_t same_edges = 0;
  std::int64_t total_edges = 0;
  std::int32_t non_isolated = 0;
};

inline ClassEdgeStats class_edge_stats(const Graph& g, const Labels& labels) {
  validate_labels(labels, g.n);
  ClassEdgeStats s;
  const std::size_t c = static_cast<std::size_t>(labels.num_classes);
  s.same_degree.assign(c, 0);
  s.total_degree.assign(c, 0);
  s.class_size.assign(c, 0);
  for (std::int32_t u = 0; u < g.n; ++u) {
    auto nbrs = g.neighbors(u);
    if (nbrs.empty()) continue;
    const std::int32_t ku = labels.values[u];
    std::int64_t same = 0;
    for (std::int32_t v : nbrs) same += labels.values[v] == ku ? 1 : 0;
    s.same_degree[ku] += same;
    s.total_degree[ku] += static_cast<std::int64_t>(nbrs.size());
    s.class_size[ku]++;
    s.same_edges += same;
    s.total_edges += static_cast<std::int64_t>(nbrs.size());
    s.non_isolated++;
  }
  return s;
}

}  // namespace detail

// Proportion of stored edges joining same-class endpoints.
inline double edge_homophily(const Graph& g, const Labels& labels) {
  auto s = detail::class_edge_stats(g, labels);
  if (s.total_edges == 0) throw std::domain_error("edge_homophily: graph has no edges");
  return static_cast<double>(s.same_edges) / static_cast<double>(s.total_edges);
}

// Mean over non-isolated nodes of the same-class fraction of each node's
// out-neighborhood.
inline double node_homophily(const Graph& g, const Labels& labels) {
  validate_labels(labels, g.n);
  double acc = 0.0;
  std::int64_t counted = 0;
  for (std::int32_t u = 0; u < g.n; ++u) {
    auto nbrs = g.neighbors(u);
    if (nbrs.empty()) continue;
    std::int64_t same = 0;
    for (std::int32_t v : nbrs) same += labels.values[v] == labels.values[u] ? 1 : 0;
    acc += static_cast<double>(same) / static_cast<double>(nbrs.size());
    counted++;
  }
  if (counted == 0) throw std::domain_error("node_homophily: all nodes are isolated");
  return acc / static_cast<double>(counted);
}

// h_k: same-class degree mass of class k over its total degree mass.
inline double class_homophily(const Graph& g, const Labels& labels, std::int32_t k) {
  if (k < 0 || k >= labels.num_classes) throw std::out_of_range("class_homophily: class out of range");
  auto s = detail::class_edge_stats(g, labels);
  if (s.total_degree[k] == 0)
    throw std::domain_error("class_homophily: class " + std::to_string(k) + " has zero total degree");
  return static_cast<double>(s.same_degree[k]) / static_cast<double>(s.total_degree[k]);
}

// Rectified excess of each class homophily over its null-model share,
// averaged over C-1. Classes with zero total degree contribute 0.
inline double improved_homophily(const Graph& g, const Labels& labels) {
  if (labels.num_classes < 2)
    throw std::domain_error("improved_homophily: undefined for a single class");
  auto s = detail::class_edge_stats(g, labels);
  if (s.total_edges == 0) throw std::domain_error("improved_homophily: graph has no edges");
  double acc = 0.0;
  for (std::int32_t k = 0; k < labels.num_classes; ++k) {
    if (s.total_degree[k] == 0) continue;
    const double hk = static_cast<double>(s.same_degree[k]) / static_cast<double>(s.total_degree[k]);
    const double fk = static_cast<double>(s.class_size[k]) / static_cast<double>(s.non_isolated);
    acc += std::max(hk - fk, 0.0);
  }
  return acc / static_cast<double>(labels.num_classes - 1);
}

inline CompatibilityMatrix compatibility_matrix(const Graph& g, const Labels& labels) {
  validate_labels(labels, g.n);
  const std::int32_t c = labels.num_classes;
  DenseMatrix counts(c, c);
  for (std::int32_t u = 0; u < g.n; ++u)
    for (std::int32_t v : g.neighbors(u)) counts(labels.values[u], labels.values[v]) += 1.0;
  CompatibilityMatrix out;
  out.values = DenseMatrix(c, c);
  out.zero_row_mask.assign(static_cast<std::size_t>(c), false);
  for (std::int32_t k = 0; k < c; ++k) {
    double row_sum = 0.0;
    for (std::int32_t l = 0; l < c; ++l) row_sum += counts(k, l);
    if (row_sum == 0.0) {
      out.zero_row_mask[static_cast<std::size_t>(k)] = true;
      continue;
    }
    for (std::int32_t l = 0; l < c; ++l) out.values(k, l) = counts(k, l) / row_sum;
  }
  return out;
}

// Node homophily over exact two-hop neighborhoods (nodes at distance exactly
// two). Estimated over k_samples sampled nodes; k_samples >= n switches to
// the exact measure over all nodes and ignores the seed. Sampled nodes with
// an empty exact-two-hop set are skipped and the normalizer reduced.
inline double two_hop_node_homophily(const Graph& g, const Labels& labels, std::int64_t k_samples,
                                     std::uint64_t seed) {
  validate_labels(labels, g.n);
  if (k_samples < 1) throw std::invalid_argument("two_hop_node_homophily: k_samples must be >= 1");

  std::vector<std::int32_t> sampled;
  if (k_samples >= g.n) {
    sampled.resize(static_cast<std::size_t>(g.n));
    for (std::int32_t u = 0; u < g.n; ++u) sampled[static_cast<std::size_t>(u)] = u;
  } else {
    Rng rng = Rng::stream(seed, {stream::kTwoHopSample});
    sampled = rng.sample_without_replacement(g.n, static_cast<std::int32_t>(k_samples));
  }

  std::vector<std::int32_t> mark(static_cast<std::size_t>(g.n), -1);
  std::vector<std::int32_t> two_hop;
  double acc = 0.0;
  std::int64_t counted = 0;
  for (std::int32_t v : sampled) {
    mark[static_cast<std::size_t>(v)] = v;
    for (std::int32_t u : g.neighbors(v)) mark[static_cast<std::size_t>(u)] = v;
    two_hop.clear();
    for (std::int32_t u : g.neighbors(v)) {
      for (std::int32_t w : g.neighbors(u)) {
        if (mark[static_cast<std::size_t>(w)] == v) continue;
        mark[static_cast<std::size_t>(w)] = v;
        two_hop.push_back(w);
      }
    }
    // entries added to mark as two-hop members must not leak into later
    // iterations: the stamp value v is unique per sampled node, so they don't.
    if (two_hop.empty()) continue;
    std::int64_t same = 0;
    for (std::int32_t w : two_hop) same += labels.values[w] == labels.values[v] ? 1 : 0;
    acc += static_cast<double>(same) / static_cast<double>(two_hop.size());
    counted++;
  }
  if (counted == 0)
    throw std::domain_error("two_hop_node_homophily: no sampled node has a non-empty two-hop set");
  return acc / static_cast<double>(counted);
}

inline HomophilyReport homophily_report(const Graph& g, const Labels& labels) {
  auto s = detail::class_edge_stats(g, labels);
  if (s.total_edges == 0) throw std::domain_error("homophily_report: graph has no edges");
  HomophilyReport r;
  r.num_classes = labels.num_classes;
  r.isolated_nodes = g.n - s.non_isolated;
  r.edge_homophily = static_cast<double>(s.same_edges) / static_cast<double>(s.total_edges);
  r.node_homophily = node_homophily(g, labels);
  for (std::int32_t k = 0; k < labels.num_classes; ++k) {
    r.class_fractions.push_back(static_cast<double>(s.class_size[k]) /
                                static_cast<double>(s.non_isolated));
    if (s.total_degree[k] == 0) {
      r.class_wise.push_back(std::numeric_limits<double>::quiet_NaN());
      r.masked_classes.push_back(k);
    } else {
      r.class_wise.push_back(static_cast<double>(s.same_degree[k]) /
                             static_cast<double>(s.total_degree[k]));
    }
  }
  if (labels.num_classes >= 2) r.improved = improved_homophily(g, labels);
  return r;
}

}  // namespace linkx
