#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace linkx {

// Row-major dense matrix of doubles. Zero-sized matrices are permitted so
// that degenerate inputs (e.g. a dataset with no features) stay representable;
// kernels validate the shapes they actually need.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows * cols), 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("DenseMatrix: negative dimension");
  }

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(std::int64_t r, std::int64_t c) { return v_[static_cast<std::size_t>(r * cols_ + c)]; }
  double operator()(std::int64_t r, std::int64_t c) const { return v_[static_cast<std::size_t>(r * cols_ + c)]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double* row(std::int64_t r) { return v_.data() + r * cols_; }
  const double* row(std::int64_t r) const { return v_.data() + r * cols_; }

  bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

 private:
  std::int64_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// CSR sparse matrix. Binary matrices (adjacency slices) carry value 1.0 per
// entry. Column indices are sorted and unique within each row.
struct SparseMatrix {
  std::int64_t rows = 0, cols = 0;
  std::vector<std::int64_t> offsets;  // rows + 1
  std::vector<std::int32_t> indices;
  std::vector<double> values;

  std::int64_t nnz() const { return static_cast<std::int64_t>(indices.size()); }
};

namespace detail {

inline void check_finite(const DenseMatrix& m, const char* where) {
#ifndef NDEBUG
  for (std::size_t i = 0; i < m.size(); ++i) {
    assert(std::isfinite(m.data()[i]) && where);
  }
#else
  (void)m;
  (void)where;
#endif
}

}  // namespace detail

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::int64_t r = 0; r < a.rows(); ++r)
    for (std::int64_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

inline SparseMatrix transpose(const SparseMatrix& s) {
  SparseMatrix out;
  out.rows = s.cols;
  out.cols = s.rows;
  out.offsets.assign(static_cast<std::size_t>(s.cols) + 1, 0);
  out.indices.resize(s.indices.size());
  out.values.resize(s.values.size());
  for (std::int32_t c : s.indices) out.offsets[static_cast<std::size_t>(c) + 1]++;
  for (std::size_t i = 1; i < out.offsets.size(); ++i) out.offsets[i] += out.offsets[i - 1];
  std::vector<std::int64_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
  for (std::int64_t r = 0; r < s.rows; ++r) {
    for (std::int64_t k = s.offsets[r]; k < s.offsets[r + 1]; ++k) {
      std::int64_t pos = cursor[static_cast<std::size_t>(s.indices[k])]++;
      out.indices[pos] = static_cast<std::int32_t>(r);
      out.values[pos] = s.values[k];
    }
  }
  return out;
}

// Sparse-dense product S (n x m, CSR) times B (m x k). Cost is nnz(S) * k.
// Accumulation order is fixed by the CSR layout, so results are bit-stable.
inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b) {
  if (s.cols != b.rows())
    throw std::invalid_argument("spmm: inner dimensions mismatch (" + std::to_string(s.cols) +
                                " vs " + std::to_string(b.rows()) + ")");
  DenseMatrix out(s.rows, b.cols());
  const std::int64_t k = b.cols();
  for (std::int64_t r = 0; r < s.rows; ++r) {
    double* out_row = out.row(r);
    for (std::int64_t e = s.offsets[r]; e < s.offsets[r + 1]; ++e) {
      const double v = s.values[e];
      const double* b_row = b.row(s.indices[e]);
      for (std::int64_t j = 0; j < k; ++j) out_row[j] += v * b_row[j];
    }
  }
  detail::check_finite(out, "spmm output");
  return out;
}

// W (out x in) * X (in x batch) + b, with the bias broadcast over columns.
// An empty bias matrix means no bias term.
inline DenseMatrix linear_forward(const DenseMatrix& w, const DenseMatrix& b, const DenseMatrix& x) {
  if (w.cols() != x.rows())
    throw std::invalid_argument("linear_forward: W cols " + std::to_string(w.cols()) +
                                " != X rows " + std::to_string(x.rows()));
  if (!b.empty() && (b.rows() != w.rows() || b.cols() != 1))
    throw std::invalid_argument("linear_forward: bias must be (out x 1)");
  DenseMatrix y(w.rows(), x.cols());
  const std::int64_t batch = x.cols();
  for (std::int64_t o = 0; o < w.rows(); ++o) {
    double* y_row = y.row(o);
    if (!b.empty()) {
      const double bo = b(o, 0);
      for (std::int64_t j = 0; j < batch; ++j) y_row[j] = bo;
    }
    const double* w_row = w.row(o);
    for (std::int64_t i = 0; i < w.cols(); ++i) {
      const double wv = w_row[i];
      const double* x_row = x.row(i);
      for (std::int64_t j = 0; j < batch; ++j) y_row[j] += wv * x_row[j];
    }
  }
  detail::check_finite(y, "linear_forward output");
  return y;
}

struct LinearGrads {
  DenseMatrix dw;
  DenseMatrix db;  // (out x 1); empty when the layer has no bias
  DenseMatrix dx;  // empty when not requested
};

inline LinearGrads linear_backward(const DenseMatrix& w, const DenseMatrix& x,
                                   const DenseMatrix& upstream, bool has_bias, bool need_dx) {
  if (upstream.rows() != w.rows() || upstream.cols() != x.cols())
    throw std::invalid_argument("linear_backward: upstream shape mismatch");
  LinearGrads g;
  g.dw = DenseMatrix(w.rows(), w.cols());
  for (std::int64_t o = 0; o < w.rows(); ++o) {
    const double* u_row = upstream.row(o);
    double* dw_row = g.dw.row(o);
    for (std::int64_t i = 0; i < w.cols(); ++i) {
      const double* x_row = x.row(i);
      double acc = 0.0;
      for (std::int64_t j = 0; j < x.cols(); ++j) acc += u_row[j] * x_row[j];
      dw_row[i] = acc;
    }
  }
  if (has_bias) {
    g.db = DenseMatrix(w.rows(), 1);
    for (std::int64_t o = 0; o < w.rows(); ++o) {
      const double* u_row = upstream.row(o);
      double acc = 0.0;
      for (std::int64_t j = 0; j < upstream.cols(); ++j) acc += u_row[j];
      g.db(o, 0) = acc;
    }
  }
  if (need_dx) {
    g.dx = DenseMatrix(x.rows(), x.cols());
    for (std::int64_t o = 0; o < w.rows(); ++o) {
      const double* w_row = w.row(o);
      const double* u_row = upstream.row(o);
      for (std::int64_t i = 0; i < x.rows(); ++i) {
        double* dx_row = g.dx.row(i);
        const double wv = w_row[i];
        for (std::int64_t j = 0; j < x.cols(); ++j) dx_row[j] += wv * u_row[j];
      }
    }
  }
  return g;
}

inline DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  return y;
}

// Subgradient 0 at exactly zero.
inline DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& upstream) {
  if (!x.same_shape(upstream)) throw std::invalid_argument("relu_backward: shape mismatch");
  DenseMatrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i)
    g.data()[i] = x.data()[i] > 0.0 ? upstream.data()[i] : 0.0;
  return g;
}

struct SoftmaxXent {
  double loss = 0.0;
  DenseMatrix grad;  // same shape as logits: (softmax - onehot) / batch
};

// Mean negative log-likelihood over columns, with per-column max subtraction.
inline SoftmaxXent softmax_xent(const DenseMatrix& logits, std::span<const std::int32_t> labels) {
  const std::int64_t c = logits.rows();
  const std::int64_t batch = logits.cols();
  if (static_cast<std::int64_t>(labels.size()) != batch)
    throw std::invalid_argument("softmax_xent: label count != batch");
  SoftmaxXent out;
  out.grad = DenseMatrix(c, batch);
  double loss = 0.0;
  for (std::int64_t j = 0; j < batch; ++j) {
    if (labels[j] < 0 || labels[j] >= c) throw std::invalid_argument("softmax_xent: label out of range");
    double mx = logits(0, j);
    for (std::int64_t k = 1; k < c; ++k) mx = std::max(mx, logits(k, j));
    double denom = 0.0;
    for (std::int64_t k = 0; k < c; ++k) denom += std::exp(logits(k, j) - mx);
    const double log_denom = std::log(denom);
    loss += log_denom - (logits(labels[j], j) - mx);
    const double inv = 1.0 / (denom * static_cast<double>(batch));
    for (std::int64_t k = 0; k < c; ++k) out.grad(k, j) = std::exp(logits(k, j) - mx) * inv;
    out.grad(labels[j], j) -= 1.0 / static_cast<double>(batch);
  }
  out.loss = loss / static_cast<double>(batch);
  return out;
}

// Column-wise softmax probabilities (for predictions and AUC scores).
inline DenseMatrix softmax_columns(const DenseMatrix& logits) {
  DenseMatrix p(logits.rows(), logits.cols());
  for (std::int64_t j = 0; j < logits.cols(); ++j) {
    double mx = logits(0, j);
    for (std::int64_t k = 1; k < logits.rows(); ++k) mx = std::max(mx, logits(k, j));
    double denom = 0.0;
    for (std::int64_t k = 0; k < logits.rows(); ++k) {
      p(k, j) = std::exp(logits(k, j) - mx);
      denom += p(k, j);
    }
    for (std::int64_t k = 0; k < logits.rows(); ++k) p(k, j) /= denom;
  }
  return p;
}

inline std::vector<std::int32_t> argmax_columns(const DenseMatrix& scores) {
  std::vector<std::int32_t> out(static_cast<std::size_t>(scores.cols()));
  for (std::int64_t j = 0; j < scores.cols(); ++j) {
    std::int32_t best = 0;
    for (std::int64_t k = 1; k < scores.rows(); ++k)
      if (scores(k, j) > scores(best, j)) best = static_cast<std::int32_t>(k);
    out[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

}  // namespace linkx
