#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkx/matrix.hpp"

namespace linkx {

using Edge = std::pair<std::int32_t, std::int32_t>;

// Immutable directed graph in CSR form. Construction merges duplicate edges,
// drops self-loops, and sorts each row, so the adjacency is binary with
// strictly increasing column indices per row. Undirected graphs store both
// directions of every edge.
struct Graph {
  std::int32_t n = 0;
  bool directed = false;
  std::vector<std::int64_t> row_offsets;  // n + 1
  std::vector<std::int32_t> col_indices;

  std::int64_t num_stored_edges() const { return static_cast<std::int64_t>(col_indices.size()); }

  std::span<const std::int32_t> neighbors(std::int32_t u) const {
    return {col_indices.data() + row_offsets[u],
            static_cast<std::size_t>(row_offsets[u + 1] - row_offsets[u])};
  }
};

inline Graph build_graph(std::span<const Edge> edges, std::int32_t n, bool directed) {
  if (n <= 0) throw std::invalid_argument("build_graph: node count must be positive");
  for (const auto& [s, d] : edges) {
    if (s < 0 || s >= n || d < 0 || d >= n)
      throw std::out_of_range("build_graph: edge (" + std::to_string(s) + ", " + std::to_string(d) +
                              ") out of range for n=" + std::to_string(n));
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);
  auto tally = [&](std::int32_t s, std::int32_t d) {
    if (s != d) counts[static_cast<std::size_t>(s) + 1]++;
  };
  for (const auto& [s, d] : edges) {
    tally(s, d);
    if (!directed) tally(d, s);
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];

  std::vector<std::int32_t> cols(static_cast<std::size_t>(counts.back()));
  std::vector<std::int64_t> cursor(counts.begin(), counts.end() - 1);
  auto place = [&](std::int32_t s, std::int32_t d) {
    if (s != d) cols[static_cast<std::size_t>(cursor[s]++)] = d;
  };
  for (const auto& [s, d] : edges) {
    place(s, d);
    if (!directed) place(d, s);
  }

  Graph g;
  g.n = n;
  g.directed = directed;
  g.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  g.col_indices.reserve(cols.size());
  for (std::int32_t u = 0; u < n; ++u) {
    auto begin = cols.begin() + counts[u];
    auto end = cols.begin() + counts[static_cast<std::size_t>(u) + 1];
    std::sort(begin, end);
    auto last = std::unique(begin, end);
    for (auto it = begin; it != last; ++it) g.col_indices.push_back(*it);
    g.row_offsets[static_cast<std::size_t>(u) + 1] = static_cast<std::int64_t>(g.col_indices.size());
  }
  return g;
}

inline std::int32_t degree(const Graph& g, std::int32_t u) {
  if (u < 0 || u >= g.n) throw std::out_of_range("degree: node " + std::to_string(u) + " out of range");
  return static_cast<std::int32_t>(g.row_offsets[u + 1] - g.row_offsets[u]);
}

inline std::vector<Edge> edge_list(const Graph& g) {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(g.num_stored_edges()));
  for (std::int32_t u = 0; u < g.n; ++u)
    for (std::int32_t v : g.neighbors(u)) out.emplace_back(u, v);
  return out;
}

// Full adjacency as a binary CSR matrix (values all 1.0).
inline SparseMatrix adjacency_matrix(const Graph& g) {
  SparseMatrix a;
  a.rows = g.n;
  a.cols = g.n;
  a.offsets = g.row_offsets;
  a.indices = g.col_indices;
  a.values.assign(g.col_indices.size(), 1.0);
  return a;
}

// Columns of the adjacency for the requested nodes: an n x |nodes| binary
// matrix whose column j is the indicator of in-neighbors of nodes[j] (plain
// neighbors for undirected graphs). These columns are the LINK feature
// vectors and the minibatch adjacency slices.
inline SparseMatrix adjacency_columns(const Graph& g, std::span<const std::int32_t> nodes) {
  std::vector<std::int32_t> position(static_cast<std::size_t>(g.n), -1);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    std::int32_t v = nodes[j];
    if (v < 0 || v >= g.n) throw std::out_of_range("adjacency_columns: node out of range");
    position[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(j);
  }
  SparseMatrix out;
  out.rows = g.n;
  out.cols = static_cast<std::int64_t>(nodes.size());
  out.offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
  std::vector<std::int32_t> row_buf;
  for (std::int32_t u = 0; u < g.n; ++u) {
    row_buf.clear();
    for (std::int32_t v : g.neighbors(u)) {
      if (position[static_cast<std::size_t>(v)] >= 0)
        row_buf.push_back(position[static_cast<std::size_t>(v)]);
    }
    std::sort(row_buf.begin(), row_buf.end());
    for (std::int32_t j : row_buf) out.indices.push_back(j);
    out.offsets[static_cast<std::size_t>(u) + 1] = static_cast<std::int64_t>(out.indices.size());
  }
  out.values.assign(out.indices.size(), 1.0);
  return out;
}

// Node labels in [0, num_classes). Classes may be empty.
struct Labels {
  std::vector<std::int32_t> values;
  std::int32_t num_classes = 0;
};

inline void validate_labels(const Labels& labels, std::int32_t n) {
  if (labels.num_classes < 1) throw std::invalid_argument("labels: class count must be >= 1");
  if (static_cast<std::int32_t>(labels.values.size()) != n)
    throw std::invalid_argument("labels: length " + std::to_string(labels.values.size()) +
                                " != node count " + std::to_string(n));
  for (std::int32_t k : labels.values)
    if (k < 0 || k >= labels.num_classes) throw std::invalid_argument("labels: value out of range");
}

// Graph + dense node features (one column per node) + labels.
struct Dataset {
  Graph graph;
  DenseMatrix features;  // D x n
  Labels labels;

  std::int32_t n() const { return graph.n; }
  std::int64_t feature_dim() const { return features.rows(); }
};

inline void validate_dataset(const Dataset& d) {
  validate_labels(d.labels, d.graph.n);
  if (d.features.cols() != d.graph.n)
    throw std::invalid_argument("dataset: feature columns " + std::to_string(d.features.cols()) +
                                " != node count " + std::to_string(d.graph.n));
  for (std::size_t i = 0; i < d.features.size(); ++i)
    if (!std::isfinite(d.features.data()[i]))
      throw std::invalid_argument("dataset: non-finite feature entry");
}

}  // namespace linkx
