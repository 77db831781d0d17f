#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linkx/matrix.hpp"
#include "linkx/models.hpp"
#include "linkx/rng.hpp"

namespace linkx {

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct Split {
  std::vector<std::int32_t> train, val, test;  // each ascending
  std::uint64_t seed = 0;
  int index = 0;
};

// Seeded shuffle, then a contiguous 50/25/25 partition (sizes rounded).
// Deterministic in (n, seed, index); index sets are stored sorted so batch
// and loss evaluation orders are canonical.
inline std::vector<Split> make_splits(std::int32_t n, std::uint64_t seed, int count = 5) {
  if (n < 4) throw std::invalid_argument("make_splits: need at least 4 nodes");
  if (count < 1) throw std::invalid_argument("make_splits: count must be >= 1");
  std::vector<Split> splits;
  for (int idx = 0; idx < count; ++idx) {
    Rng rng = Rng::stream(seed, {stream::kSplit, static_cast<std::uint64_t>(idx)});
    std::vector<std::int32_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const auto n_train = static_cast<std::size_t>(std::llround(0.5 * n));
    const auto n_val = static_cast<std::size_t>(std::llround(0.25 * n));
    Split s;
    s.seed = seed;
    s.index = idx;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    s.test.assign(perm.begin() + n_train + n_val, perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    splits.push_back(std::move(s));
  }
  return splits;
}

// ---------------------------------------------------------------------------
// AdamW with decoupled weight decay: the decay multiplicatively shrinks the
// weights and never enters the moment estimates. Biases opt out via the
// ParamRef decay flag.
// ---------------------------------------------------------------------------

struct AdamWConfig {
  double lr = 0.01;
  double weight_decay = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamWState {
  std::vector<DenseMatrix> m, v;
  std::int64_t step = 0;
};

inline void adamw_step(std::span<const ParamRef> params, std::span<const DenseMatrix> grads,
                       AdamWState& state, const AdamWConfig& cfg) {
  if (params.size() != grads.size()) throw std::invalid_argument("adamw_step: param/grad count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value->rows(), p.value->cols());
      state.v.emplace_back(p.value->rows(), p.value->cols());
    }
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!params[i].value->same_shape(grads[i]))
      throw std::invalid_argument("adamw_step: grad shape mismatch for " + params[i].name);
    for (std::size_t j = 0; j < grads[i].size(); ++j)
      if (!std::isfinite(grads[i].data()[j]))
        throw std::runtime_error("adamw_step: non-finite gradient in " + params[i].name);
  }
  state.step++;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    DenseMatrix& w = *params[i].value;
    const DenseMatrix& g = grads[i];
    DenseMatrix& m = state.m[i];
    DenseMatrix& v = state.v[i];
    const double decay = params[i].decay ? cfg.weight_decay : 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      m.data()[j] = cfg.beta1 * m.data()[j] + (1.0 - cfg.beta1) * g.data()[j];
      v.data()[j] = cfg.beta2 * v.data()[j] + (1.0 - cfg.beta2) * g.data()[j] * g.data()[j];
      const double m_hat = m.data()[j] / bc1;
      const double v_hat = v.data()[j] / bc2;
      w.data()[j] *= 1.0 - cfg.lr * decay;
      w.data()[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class Metric { accuracy, roc_auc };

inline double accuracy(const DenseMatrix& scores, std::span<const std::int32_t> labels) {
  if (static_cast<std::size_t>(scores.cols()) != labels.size() || labels.empty())
    throw std::invalid_argument("accuracy: shape mismatch or empty mask");
  auto preds = argmax_columns(scores);
  std::int64_t correct = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) correct += preds[j] == labels[j] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

inline double accuracy(const DenseMatrix& scores, std::span<const std::int32_t> labels,
                       std::span<const std::int32_t> mask) {
  if (mask.empty()) throw std::invalid_argument("accuracy: empty mask");
  DenseMatrix sliced(scores.rows(), static_cast<std::int64_t>(mask.size()));
  std::vector<std::int32_t> lab(mask.size());
  for (std::size_t j = 0; j < mask.size(); ++j) {
    for (std::int64_t k = 0; k < scores.rows(); ++k) sliced(k, static_cast<std::int64_t>(j)) = scores(k, mask[j]);
    lab[j] = labels[mask[j]];
  }
  return accuracy(sliced, lab);
}

// Mann-Whitney U normalized, ties counted half (midranks). Scores are the
// class-1 scores of a binary problem.
inline double roc_auc(std::span<const double> class1_scores, std::span<const std::int32_t> labels) {
  if (class1_scores.size() != labels.size() || labels.empty())
    throw std::invalid_argument("roc_auc: shape mismatch or empty mask");
  std::int64_t n_pos = 0, n_neg = 0;
  for (std::int32_t y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("roc_auc: labels must be binary");
    (y == 1 ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::domain_error("roc_auc: undefined when the mask holds a single class");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return class1_scores[a] < class1_scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && class1_scores[order[j + 1]] == class1_scores[order[i]]) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Metric over class-probability columns aligned with `labels`.
inline double eval_metric(Metric metric, const DenseMatrix& probs,
                          std::span<const std::int32_t> labels) {
  if (metric == Metric::accuracy) return accuracy(probs, labels);
  if (probs.rows() != 2) throw std::invalid_argument("roc_auc: requires exactly 2 classes");
  std::vector<double> scores(static_cast<std::size_t>(probs.cols()));
  for (std::int64_t j = 0; j < probs.cols(); ++j) scores[static_cast<std::size_t>(j)] = probs(1, j);
  return roc_auc(scores, labels);
}

// Metric over full-graph score columns restricted to masked nodes.
inline double eval_metric(Metric metric, const DenseMatrix& scores,
                          std::span<const std::int32_t> labels, std::span<const std::int32_t> mask) {
  if (mask.empty()) throw std::invalid_argument("eval_metric: empty mask");
  DenseMatrix sliced(scores.rows(), static_cast<std::int64_t>(mask.size()));
  std::vector<std::int32_t> lab(mask.size());
  for (std::size_t j = 0; j < mask.size(); ++j) {
    for (std::int64_t k = 0; k < scores.rows(); ++k)
      sliced(k, static_cast<std::int64_t>(j)) = scores(k, mask[j]);
    lab[j] = labels[mask[j]];
  }
  return eval_metric(metric, sliced, lab);
}

// ---------------------------------------------------------------------------
// Model zoo dispatch and hyperparameter grids
// ---------------------------------------------------------------------------

enum class ModelKind { mlp, link, linkx, concat_mlp, labelprop, sgc };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::link: return "link";
    case ModelKind::linkx: return "linkx";
    case ModelKind::concat_mlp: return "concat-mlp";
    case ModelKind::labelprop: return "labelprop";
    case ModelKind::sgc: return "sgc";
  }
  return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
  if (s == "mlp") return ModelKind::mlp;
  if (s == "link") return ModelKind::link;
  if (s == "linkx") return ModelKind::linkx;
  if (s == "concat-mlp") return ModelKind::concat_mlp;
  if (s == "labelprop") return ModelKind::labelprop;
  if (s == "sgc") return ModelKind::sgc;
  throw std::invalid_argument("unknown model kind: " + s);
}

struct GridPoint {
  std::int64_t hidden = 16;
  int layers = 2;
  double lr = 0.01;
  double weight_decay = 0.001;
  double alpha = 0.9;  // label propagation only
};

// Default search spaces per model.
inline std::vector<GridPoint> default_grid(ModelKind kind) {
  std::vector<GridPoint> grid;
  switch (kind) {
    case ModelKind::mlp:
      for (std::int64_t h : {16, 32, 64, 128, 256})
        for (int l : {2, 3}) grid.push_back({.hidden = h, .layers = l});
      break;
    case ModelKind::link:
    case ModelKind::sgc:
      for (double wd : {0.001, 0.01, 0.1}) grid.push_back({.weight_decay = wd});
      break;
    case ModelKind::linkx:
    case ModelKind::concat_mlp:
      for (std::int64_t h : {16, 32, 128, 256})
        for (int l : {1, 2, 3}) grid.push_back({.hidden = h, .layers = l});
      break;
    case ModelKind::labelprop:
      for (double a : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) grid.push_back({.alpha = a});
      break;
  }
  return grid;
}

struct TrainConfig {
  int epochs = 500;
  enum class BatchPolicy { full, iid } batch_policy = BatchPolicy::full;
  double batch_fraction = 0.1;  // iid batch size = ceil(train * fraction)
  int steps_per_epoch = 1;
  std::uint64_t seed = 0;
  Metric metric = Metric::accuracy;
  int hops = 1;                 // labelprop / sgc
  int prop_iterations = 50;     // labelprop
  PropNorm normalization = PropNorm::sym;
  bool link_bias = false;
  int workers = 1;              // grid points trained in parallel
};

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct GridPointResult {
  GridPoint point;
  bool failed = false;
  std::string fail_reason;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_metric;  // per epoch
  double best_val = -1.0;
  int best_epoch = -1;
};

// Parameter snapshot of the selected model.
struct ModelSnapshot {
  ModelKind kind = ModelKind::mlp;
  GridPoint point;
  std::vector<std::pair<std::string, DenseMatrix>> params;
};

struct TrainResult {
  std::vector<GridPointResult> grid;
  int selected_grid_index = -1;
  int selected_epoch = -1;
  double train_metric = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
  int test_evals = 0;  // contract: exactly one, after selection
  ModelSnapshot snapshot;
};

// ---------------------------------------------------------------------------
// Trainable wrapper: uniform interface over the gradient-trained models.
// ---------------------------------------------------------------------------

namespace detail {

class Trainable {
 public:
  virtual ~Trainable() = default;
  virtual std::vector<ParamRef> params() = 0;
  virtual std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& b) = 0;
  virtual DenseMatrix predict(const NodeBatch& b) = 0;
  virtual bool needs_adjacency() const = 0;
  // Feature matrix batches are sliced from; null when the model is
  // feature-agnostic. SGC points this at its propagated features.
  virtual const DenseMatrix* feature_source() const = 0;
};

class MlpTrainable final : public Trainable {
 public:
  MlpTrainable(MlpModel model, const DenseMatrix* source) : model_(std::move(model)), source_(source) {}
  std::vector<ParamRef> params() override { return model_.params(); }
  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& b) override {
    return model_.loss_and_grads(b);
  }
  DenseMatrix predict(const NodeBatch& b) override { return model_.forward(b.features); }
  bool needs_adjacency() const override { return false; }
  const DenseMatrix* feature_source() const override { return source_; }
  MlpModel& model() { return model_; }

 private:
  MlpModel model_;
  const DenseMatrix* source_;
};

// SGC owns its propagated feature matrix and is otherwise a 1-layer MLP.
class SgcTrainable final : public Trainable {
 public:
  SgcTrainable(MlpModel model, DenseMatrix propagated)
      : model_(std::move(model)), propagated_(std::move(propagated)) {}
  std::vector<ParamRef> params() override { return model_.params(); }
  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& b) override {
    return model_.loss_and_grads(b);
  }
  DenseMatrix predict(const NodeBatch& b) override { return model_.forward(b.features); }
  bool needs_adjacency() const override { return false; }
  const DenseMatrix* feature_source() const override { return &propagated_; }
  MlpModel& model() { return model_; }

 private:
  MlpModel model_;
  DenseMatrix propagated_;
};

class LinkTrainable final : public Trainable {
 public:
  explicit LinkTrainable(LinkModel model) : model_(std::move(model)) {}
  std::vector<ParamRef> params() override { return model_.params(); }
  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& b) override {
    return model_.loss_and_grads(b);
  }
  DenseMatrix predict(const NodeBatch& b) override { return model_.forward(b); }
  bool needs_adjacency() const override { return true; }
  const DenseMatrix* feature_source() const override { return nullptr; }
  LinkModel& model() { return model_; }

 private:
  LinkModel model_;
};

class LinkxTrainable final : public Trainable {
 public:
  LinkxTrainable(LinkxModel model, const DenseMatrix* source)
      : model_(std::move(model)), source_(source) {}
  std::vector<ParamRef> params() override { return model_.params(); }
  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& b) override {
    return model_.loss_and_grads(b);
  }
  DenseMatrix predict(const NodeBatch& b) override { return model_.forward(b); }
  bool needs_adjacency() const override { return true; }
  const DenseMatrix* feature_source() const override { return source_; }
  LinkxModel& model() { return model_; }

 private:
  LinkxModel model_;
  const DenseMatrix* source_;
};

class ConcatTrainable final : public Trainable {
 public:
  ConcatTrainable(ConcatMlpModel model, const DenseMatrix* source)
      : model_(std::move(model)), source_(source) {}
  std::vector<ParamRef> params() override { return model_.params(); }
  std::pair<double, std::vector<DenseMatrix>> loss_and_grads(const NodeBatch& b) override {
    return model_.loss_and_grads(b);
  }
  DenseMatrix predict(const NodeBatch& b) override { return model_.forward(b); }
  bool needs_adjacency() const override { return true; }
  const DenseMatrix* feature_source() const override { return source_; }
  ConcatMlpModel& model() { return model_; }

 private:
  ConcatMlpModel model_;
  const DenseMatrix* source_;
};

inline std::unique_ptr<Trainable> make_trainable(ModelKind kind, const Dataset& data,
                                                 const GridPoint& point, const TrainConfig& cfg,
                                                 Rng& rng) {
  const std::int64_t classes = data.labels.num_classes;
  switch (kind) {
    case ModelKind::mlp:
      return std::make_unique<MlpTrainable>(
          MlpModel::init(data.feature_dim(), point.hidden, classes, point.layers, rng),
          &data.features);
    case ModelKind::link:
      return std::make_unique<LinkTrainable>(LinkModel::init(data.n(), classes, cfg.link_bias, rng));
    case ModelKind::linkx:
      return std::make_unique<LinkxTrainable>(
          LinkxModel::init(data.n(), data.feature_dim(), classes, point.hidden, point.layers, rng),
          &data.features);
    case ModelKind::concat_mlp:
      return std::make_unique<ConcatTrainable>(
          ConcatMlpModel::init(data.n(), data.feature_dim(), classes, point.hidden, point.layers, rng),
          &data.features);
    case ModelKind::sgc: {
      DenseMatrix propagated = sgc_propagate(data.graph, data.features, cfg.hops);
      MlpModel lr = MlpModel::init(data.feature_dim(), point.hidden, classes, 1, rng);
      return std::make_unique<SgcTrainable>(std::move(lr), std::move(propagated));
    }
    default:
      throw std::invalid_argument("make_trainable: model is not gradient-trained");
  }
}

inline ModelSnapshot snapshot_params(ModelKind kind, const GridPoint& point,
                                     std::span<const ParamRef> params) {
  ModelSnapshot s;
  s.kind = kind;
  s.point = point;
  for (const auto& p : params) s.params.emplace_back(p.name, *p.value);
  return s;
}

inline void restore_params(std::span<const ParamRef> params, const ModelSnapshot& snap) {
  if (params.size() != snap.params.size())
    throw std::invalid_argument("restore_params: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != snap.params[i].first)
      throw std::invalid_argument("restore_params: parameter order mismatch at " + params[i].name);
    *params[i].value = snap.params[i].second;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Training loops. Both loops share the protocol: for every grid point run
// `epochs` optimizer steps, tracking the epoch of best validation metric;
// the globally selected parameters are the best-validation snapshot with
// ties broken toward the earliest epoch, then the earliest grid point. The
// test metric is computed exactly once, after selection.
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_train_inputs(std::span<const GridPoint> grid, const TrainConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("train: empty grid");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  for (const auto& p : grid) {
    if (p.lr <= 0.0) throw std::invalid_argument("train: learning rate must be positive");
    if (p.hidden < 1) throw std::invalid_argument("train: hidden dim must be positive");
    if (p.layers < 1) throw std::invalid_argument("train: layer count must be >= 1");
  }
}

inline TrainResult train_gradient_model(ModelKind kind, const Dataset& data, const Split& split,
                                        std::span<const GridPoint> grid, const TrainConfig& cfg) {
  validate_train_inputs(grid, cfg);
  TrainResult result;
  result.grid.resize(grid.size());

  struct PerGrid {
    GridPointResult res;
    std::optional<ModelSnapshot> best;
  };
  std::vector<PerGrid> per_grid(grid.size());

  auto run_grid_point = [&](std::size_t gi) {
    PerGrid out;
    out.res.point = grid[gi];
    try {
      Rng init_rng = Rng::stream(cfg.seed, {stream::kWeightInit, static_cast<std::uint64_t>(gi)});
      auto model = make_trainable(kind, data, grid[gi], cfg, init_rng);
      const bool need_adj = model->needs_adjacency();
      const DenseMatrix* feat = model->feature_source();

      NodeBatch val_batch = make_batch(data, split.val, need_adj, feat);
      NodeBatch full_train;
      const auto n_train = static_cast<std::int32_t>(split.train.size());
      std::int32_t batch_size = n_train;
      const bool iid = cfg.batch_policy == TrainConfig::BatchPolicy::iid;
      if (iid) {
        batch_size = static_cast<std::int32_t>(
            std::ceil(cfg.batch_fraction * static_cast<double>(n_train)));
        batch_size = std::clamp<std::int32_t>(batch_size, 1, n_train);
      }
      if (!iid || batch_size == n_train) full_train = make_batch(data, split.train, need_adj, feat);
      Rng batch_rng = Rng::stream(cfg.seed, {stream::kMinibatch, static_cast<std::uint64_t>(gi)});

      AdamWConfig opt_cfg;
      opt_cfg.lr = grid[gi].lr;
      opt_cfg.weight_decay = grid[gi].weight_decay;
      AdamWState opt;
      auto params = model->params();

      for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        const int steps = iid ? cfg.steps_per_epoch : 1;
        for (int step = 0; step < steps; ++step) {
          const NodeBatch* batch = &full_train;
          NodeBatch sampled;
          if (iid && batch_size < n_train) {
            auto pick = batch_rng.sample_without_replacement(n_train, batch_size);
            std::vector<std::int32_t> nodes(pick.size());
            for (std::size_t i = 0; i < pick.size(); ++i) nodes[i] = split.train[pick[i]];
            sampled = make_batch(data, nodes, need_adj, feat);
            batch = &sampled;
          }
          // when the batch covers the whole train set, sampling would only
          // permute it and batches are canonically sorted, so the fixed full
          // batch is used directly (first step equals a full-batch step).
          auto [loss, grads] = model->loss_and_grads(*batch);
          if (!std::isfinite(loss)) throw std::runtime_error("non-finite training loss");
          adamw_step(params, grads, opt, opt_cfg);
          epoch_loss = loss;
        }
        out.res.train_loss.push_back(epoch_loss);
        DenseMatrix val_probs = softmax_columns(model->predict(val_batch));
        const double val = eval_metric(cfg.metric, val_probs, val_batch.labels);
        out.res.val_metric.push_back(val);
        if (val > out.res.best_val) {
          out.res.best_val = val;
          out.res.best_epoch = epoch;
          out.best = snapshot_params(kind, grid[gi], params);
        }
      }
    } catch (const std::exception& e) {
      out.res.failed = true;
      out.res.fail_reason = e.what();
      out.best.reset();
    }
    return out;
  };

  if (cfg.workers > 1 && grid.size() > 1) {
    std::size_t next = 0;
    // bounded pool: at most `workers` in flight
    std::vector<std::pair<std::size_t, std::future<PerGrid>>> in_flight;
    while (next < grid.size() || !in_flight.empty()) {
      while (next < grid.size() && in_flight.size() < static_cast<std::size_t>(cfg.workers)) {
        in_flight.emplace_back(next, std::async(std::launch::async, run_grid_point, next));
        ++next;
      }
      auto& front = in_flight.front();
      per_grid[front.first] = front.second.get();
      in_flight.erase(in_flight.begin());
    }
  } else {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) per_grid[gi] = run_grid_point(gi);
  }

  double best_val = -1.0;
  int best_gi = -1;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    result.grid[gi] = per_grid[gi].res;
    if (!per_grid[gi].res.failed && per_grid[gi].res.best_val > best_val) {
      best_val = per_grid[gi].res.best_val;
      best_gi = static_cast<int>(gi);
    }
  }
  if (best_gi < 0) throw std::runtime_error("train: every grid point failed");
  result.selected_grid_index = best_gi;
  result.selected_epoch = result.grid[best_gi].best_epoch;
  result.val_metric = result.grid[best_gi].best_val;
  result.snapshot = *per_grid[best_gi].best;

  // Rebuild the selected model once for train/test evaluation.
  Rng dummy(0);
  auto model = make_trainable(kind, data, grid[best_gi], cfg, dummy);
  auto params = model->params();
  restore_params(params, result.snapshot);
  NodeBatch train_batch = make_batch(data, split.train, model->needs_adjacency(), model->feature_source());
  result.train_metric =
      eval_metric(cfg.metric, softmax_columns(model->predict(train_batch)), train_batch.labels);
  NodeBatch test_batch = make_batch(data, split.test, model->needs_adjacency(), model->feature_source());
  result.test_metric =
      eval_metric(cfg.metric, softmax_columns(model->predict(test_batch)), test_batch.labels);
  result.test_evals = 1;
  return result;
}

inline TrainResult train_labelprop(const Dataset& data, const Split& split,
                                   std::span<const GridPoint> grid, const TrainConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("train: empty grid");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  TrainResult result;
  result.grid.resize(grid.size());
  std::vector<std::int32_t> seed_labels(static_cast<std::size_t>(data.n()), -1);
  for (std::int32_t u : split.train) seed_labels[static_cast<std::size_t>(u)] = data.labels.values[u];

  std::vector<DenseMatrix> soft_per_grid(grid.size());
  double best_val = -1.0;
  int best_gi = -1;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    GridPointResult& res = result.grid[gi];
    res.point = grid[gi];
    try {
      PropagationConfig pcfg;
      pcfg.alpha = grid[gi].alpha;
      pcfg.hops = cfg.hops;
      pcfg.iterations = cfg.prop_iterations;
      pcfg.normalization = cfg.normalization;
      DenseMatrix soft = label_propagation(data.graph, seed_labels, data.labels.num_classes, pcfg);
      const double val = eval_metric(cfg.metric, soft, data.labels.values, split.val);
      res.best_val = val;
      res.best_epoch = 0;
      res.val_metric.push_back(val);
      soft_per_grid[gi] = std::move(soft);
      if (val > best_val) {
        best_val = val;
        best_gi = static_cast<int>(gi);
      }
    } catch (const std::exception& e) {
      res.failed = true;
      res.fail_reason = e.what();
    }
  }
  if (best_gi < 0) throw std::runtime_error("train: every grid point failed");
  result.selected_grid_index = best_gi;
  result.selected_epoch = 0;
  result.val_metric = best_val;
  const DenseMatrix& soft = soft_per_grid[static_cast<std::size_t>(best_gi)];
  result.train_metric = eval_metric(cfg.metric, soft, data.labels.values, split.train);
  result.test_metric = eval_metric(cfg.metric, soft, data.labels.values, split.test);
  result.test_evals = 1;
  ModelSnapshot snap;
  snap.kind = ModelKind::labelprop;
  snap.point = grid[static_cast<std::size_t>(best_gi)];
  DenseMatrix alpha(1, 1);
  alpha(0, 0) = grid[static_cast<std::size_t>(best_gi)].alpha;
  snap.params.emplace_back("labelprop.alpha", std::move(alpha));
  result.snapshot = std::move(snap);
  return result;
}

}  // namespace detail

inline TrainResult train_full_batch(ModelKind kind, const Dataset& data, const Split& split,
                                    std::span<const GridPoint> grid, const TrainConfig& cfg) {
  TrainConfig full_cfg = cfg;
  full_cfg.batch_policy = TrainConfig::BatchPolicy::full;
  if (kind == ModelKind::labelprop) return detail::train_labelprop(data, split, grid, full_cfg);
  return detail::train_gradient_model(kind, data, split, grid, full_cfg);
}

// i.i.d. node minibatching: per epoch, `steps_per_epoch` uniform batches of
// ceil(fraction * train) nodes without replacement within each batch; one
// optimizer step per batch. Only the column-sliced models support it.
inline TrainResult train_minibatch(ModelKind kind, const Dataset& data, const Split& split,
                                   std::span<const GridPoint> grid, const TrainConfig& cfg) {
  if (kind != ModelKind::mlp && kind != ModelKind::link && kind != ModelKind::linkx)
    throw std::invalid_argument(std::string(model_kind_name(kind)) +
                                " does not support i.i.d. minibatch training");
  TrainConfig mb_cfg = cfg;
  mb_cfg.batch_policy = TrainConfig::BatchPolicy::iid;
  return detail::train_gradient_model(kind, data, split, grid, mb_cfg);
}

}  // namespace linkx
