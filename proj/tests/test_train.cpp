#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "linkx/synth.hpp"
#include "linkx/train.hpp"
#include "oracles.hpp"

using linkx::Dataset;
using linkx::DenseMatrix;
using linkx::GridPoint;
using linkx::Metric;
using linkx::ModelKind;
using linkx::Rng;
using linkx::Split;
using linkx::TrainConfig;
using linkx::TrainResult;

namespace {

bool snapshots_identical(const linkx::ModelSnapshot& a, const linkx::ModelSnapshot& b) {
  if (a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].first != b.params[i].first) return false;
    const DenseMatrix& ma = a.params[i].second;
    const DenseMatrix& mb = b.params[i].second;
    if (!ma.same_shape(mb)) return false;
    for (std::size_t j = 0; j < ma.size(); ++j)
      if (ma.data()[j] != mb.data()[j]) return false;
  }
  return true;
}

double jaccard(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  std::set<std::int32_t> sa(a.begin(), a.end());
  std::int64_t inter = 0;
  for (auto x : b) inter += sa.count(x);
  return static_cast<double>(inter) /
         static_cast<double>(a.size() + b.size() - static_cast<std::size_t>(inter));
}

}  // namespace

TEST_CASE("make_splits: sizes, determinism, disjoint cover") {
  auto tiny = linkx::make_splits(4, 1, 1);
  REQUIRE(tiny[0].train.size() == 2);
  REQUIRE(tiny[0].val.size() == 1);
  REQUIRE(tiny[0].test.size() == 1);

  auto a = linkx::make_splits(100, 7, 5);
  auto b = linkx::make_splits(100, 7, 5);
  for (int i = 0; i < 5; ++i) {
    REQUIRE(a[i].train == b[i].train);
    REQUIRE(a[i].val == b[i].val);
    REQUIRE(a[i].test == b[i].test);
    std::set<std::int32_t> seen;
    for (const auto* part : {&a[i].train, &a[i].val, &a[i].test})
      for (auto u : *part) REQUIRE(seen.insert(u).second);
    REQUIRE(seen.size() == 100);
    REQUIRE(a[i].train.size() == 50);
    REQUIRE(a[i].val.size() == 25);
  }
}

TEST_CASE("make_splits: different split indices overlap like random halves") {
  auto splits = linkx::make_splits(1000, 3, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      REQUIRE(jaccard(splits[i].train, splits[j].train) < 0.6);
  REQUIRE_THROWS_AS(linkx::make_splits(3, 0, 5), std::invalid_argument);
}

TEST_CASE("adamw first step with zero decay is a normalized gradient step") {
  DenseMatrix w(2, 2);
  w.fill(1.0);
  DenseMatrix g(2, 2);
  g(0, 0) = 0.5; g(0, 1) = -0.25; g(1, 0) = 2.0; g(1, 1) = -4.0;
  std::vector<linkx::ParamRef> params{{"w", &w, true}};
  std::vector<DenseMatrix> grads{g};
  linkx::AdamWState state;
  linkx::AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  linkx::adamw_step(params, grads, state, cfg);
  for (std::int64_t r = 0; r < 2; ++r)
    for (std::int64_t c = 0; c < 2; ++c) {
      double expected = 1.0 - cfg.lr * g(r, c) / (std::fabs(g(r, c)) + cfg.eps);
      REQUIRE(w(r, c) == Catch::Approx(expected).margin(1e-9));
    }
}

TEST_CASE("adamw with zero gradient applies a pure multiplicative shrink") {
  DenseMatrix w(1, 3);
  w(0, 0) = 2.0; w(0, 1) = -3.0; w(0, 2) = 0.5;
  DenseMatrix b(1, 1);
  b(0, 0) = 4.0;
  std::vector<linkx::ParamRef> params{{"w", &w, true}, {"b", &b, false}};
  std::vector<DenseMatrix> grads{DenseMatrix(1, 3), DenseMatrix(1, 1)};
  linkx::AdamWState state;
  linkx::AdamWConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.01;
  linkx::adamw_step(params, grads, state, cfg);
  REQUIRE(w(0, 0) == Catch::Approx(2.0 * (1.0 - 0.1 * 0.01)).epsilon(1e-14));
  REQUIRE(w(0, 1) == Catch::Approx(-3.0 * (1.0 - 0.1 * 0.01)).epsilon(1e-14));
  REQUIRE(b(0, 0) == 4.0);  // biases are excluded from decay
}

TEST_CASE("adamw converges monotonically on a quadratic bowl after burn-in") {
  DenseMatrix w(1, 2);
  w(0, 0) = 3.0;
  w(0, 1) = -2.0;
  std::vector<linkx::ParamRef> params{{"w", &w, true}};
  linkx::AdamWState state;
  linkx::AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  std::vector<double> dist;
  for (int step = 0; step < 200; ++step) {
    DenseMatrix g(1, 2);
    g(0, 0) = 2.0 * w(0, 0);
    g(0, 1) = 2.0 * w(0, 1);
    std::vector<DenseMatrix> grads{g};
    linkx::adamw_step(params, grads, state, cfg);
    dist.push_back(std::hypot(w(0, 0), w(0, 1)));
  }
  for (std::size_t i = 10; i < dist.size(); ++i) REQUIRE(dist[i] <= dist[i - 1] + 1e-12);
  REQUIRE(dist.back() < dist.front());
}

TEST_CASE("adamw aborts on non-finite gradients") {
  DenseMatrix w(1, 1);
  std::vector<linkx::ParamRef> params{{"w", &w, true}};
  DenseMatrix g(1, 1);
  g(0, 0) = std::numeric_limits<double>::quiet_NaN();
  std::vector<DenseMatrix> grads{g};
  linkx::AdamWState state;
  linkx::AdamWConfig cfg;
  REQUIRE_THROWS_AS(linkx::adamw_step(params, grads, state, cfg), std::runtime_error);
}

TEST_CASE("accuracy and roc_auc reference values") {
  DenseMatrix scores(2, 4);
  scores(0, 0) = 1.0; scores(1, 0) = 0.0;
  scores(0, 1) = 0.0; scores(1, 1) = 1.0;
  scores(0, 2) = 1.0; scores(1, 2) = 0.0;
  scores(0, 3) = 0.2; scores(1, 3) = 0.8;
  std::vector<std::int32_t> labels{0, 1, 1, 1};
  REQUIRE(linkx::accuracy(scores, labels) == 0.75);

  std::vector<double> sep{0.1, 0.2, 0.8, 0.9};
  std::vector<std::int32_t> sep_labels{0, 0, 1, 1};
  REQUIRE(linkx::roc_auc(sep, sep_labels) == 1.0);

  std::vector<double> ties{0.5, 0.5, 0.5, 0.5};
  REQUIRE(linkx::roc_auc(ties, sep_labels) == 0.5);

  std::vector<double> mixed{0.1, 0.4, 0.35, 0.8};
  std::vector<std::int32_t> mixed_labels{0, 0, 1, 1};
  REQUIRE(linkx::roc_auc(mixed, mixed_labels) == 0.75);

  std::vector<std::int32_t> single{1, 1, 1, 1};
  REQUIRE_THROWS_AS(linkx::roc_auc(mixed, single), std::domain_error);
}

TEST_CASE("masked accuracy slices score columns") {
  DenseMatrix scores(2, 5);
  for (int j = 0; j < 5; ++j) scores(j % 2, j) = 1.0;
  std::vector<std::int32_t> labels{0, 1, 0, 0, 0};
  std::vector<std::int32_t> mask{0, 1, 3};
  REQUIRE(linkx::accuracy(scores, labels, mask) == Catch::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("MLP reaches 100% test accuracy on noiseless separable features") {
  auto tc = linkx::generate_two_channel(200, 2, linkx::AdjacencySignal::none,
                                        linkx::FeatureSignal::gaussian, 0.0, 31);
  auto splits = linkx::make_splits(200, 5, 1);
  TrainConfig cfg;
  cfg.epochs = 120;
  cfg.seed = 5;
  std::vector<GridPoint> grid{{.hidden = 8, .layers = 2}};
  auto res = linkx::train_full_batch(ModelKind::mlp, tc.dataset, splits[0], grid, cfg);
  REQUIRE(res.test_metric == 1.0);
  REQUIRE(res.test_evals == 1);
  for (double loss : res.grid[0].train_loss) REQUIRE(std::isfinite(loss));
}

TEST_CASE("label propagation solves pure homophily at alpha .9") {
  linkx::SynthSpec spec;
  spec.kind = linkx::SynthKind::pure_homophily;
  spec.n = 40;
  spec.num_classes = 2;
  Dataset data = linkx::generate_pattern(spec);
  auto splits = linkx::make_splits(40, 11, 1);
  TrainConfig cfg;
  cfg.seed = 11;
  std::vector<GridPoint> grid{{.alpha = 0.9}};
  auto res = linkx::train_full_batch(ModelKind::labelprop, data, splits[0], grid, cfg);
  REQUIRE(res.test_metric == 1.0);
}

TEST_CASE("one optimizer step decreases the training loss for every model") {
  auto tc = linkx::generate_two_channel(60, 2, linkx::AdjacencySignal::monophilous,
                                        linkx::FeatureSignal::gaussian, 0.2, 37);
  auto splits = linkx::make_splits(60, 3, 1);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 9;
  for (ModelKind kind : {ModelKind::mlp, ModelKind::link, ModelKind::linkx,
                         ModelKind::concat_mlp, ModelKind::sgc}) {
    std::vector<GridPoint> grid{{.hidden = 6, .layers = 2, .lr = 0.005}};
    if (kind == ModelKind::link || kind == ModelKind::sgc) grid[0].layers = 1;
    auto res = linkx::train_full_batch(kind, tc.dataset, splits[0], grid, cfg);
    INFO(linkx::model_kind_name(kind));
    REQUIRE(res.grid[0].train_loss.size() == 2);
    REQUIRE(res.grid[0].train_loss[1] < res.grid[0].train_loss[0]);
  }
}

TEST_CASE("training is bit-deterministic per (dataset, grid, cfg, seed)") {
  auto tc = linkx::generate_two_channel(80, 2, linkx::AdjacencySignal::monophilous,
                                        linkx::FeatureSignal::gaussian, 0.4, 41);
  auto splits = linkx::make_splits(80, 13, 1);
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.seed = 17;
  std::vector<GridPoint> grid{{.hidden = 4, .layers = 1}, {.hidden = 4, .layers = 2}};
  auto a = linkx::train_full_batch(ModelKind::linkx, tc.dataset, splits[0], grid, cfg);
  auto b = linkx::train_full_batch(ModelKind::linkx, tc.dataset, splits[0], grid, cfg);
  REQUIRE(a.test_metric == b.test_metric);
  REQUIRE(a.selected_grid_index == b.selected_grid_index);
  REQUIRE(a.selected_epoch == b.selected_epoch);
  REQUIRE(snapshots_identical(a.snapshot, b.snapshot));
}

TEST_CASE("worker pool does not change results") {
  auto tc = linkx::generate_two_channel(60, 2, linkx::AdjacencySignal::monophilous,
                                        linkx::FeatureSignal::gaussian, 0.4, 43);
  auto splits = linkx::make_splits(60, 19, 1);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 23;
  std::vector<GridPoint> grid{{.hidden = 4, .layers = 1},
                              {.hidden = 4, .layers = 2},
                              {.hidden = 8, .layers = 1}};
  auto serial = linkx::train_full_batch(ModelKind::mlp, tc.dataset, splits[0], grid, cfg);
  cfg.workers = 3;
  auto parallel = linkx::train_full_batch(ModelKind::mlp, tc.dataset, splits[0], grid, cfg);
  REQUIRE(serial.test_metric == parallel.test_metric);
  REQUIRE(snapshots_identical(serial.snapshot, parallel.snapshot));
}

TEST_CASE("a diverging grid point is skipped, not fatal") {
  auto tc = linkx::generate_two_channel(50, 2, linkx::AdjacencySignal::none,
                                        linkx::FeatureSignal::gaussian, 0.1, 47);
  auto splits = linkx::make_splits(50, 29, 1);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 31;
  std::vector<GridPoint> grid{{.hidden = 8, .layers = 2, .lr = 1e200},
                              {.hidden = 8, .layers = 2, .lr = 0.01}};
  auto res = linkx::train_full_batch(ModelKind::mlp, tc.dataset, splits[0], grid, cfg);
  REQUIRE(res.grid[0].failed);
  REQUIRE_FALSE(res.grid[1].failed);
  REQUIRE(res.selected_grid_index == 1);
}

TEST_CASE("minibatch with fraction 1 reproduces the full-batch first step bitwise") {
  auto tc = linkx::generate_two_channel(60, 2, linkx::AdjacencySignal::monophilous,
                                        linkx::FeatureSignal::gaussian, 0.3, 53);
  auto splits = linkx::make_splits(60, 37, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 41;
  std::vector<GridPoint> grid{{.hidden = 4, .layers = 2}};
  for (ModelKind kind : {ModelKind::mlp, ModelKind::link, ModelKind::linkx}) {
    auto full = linkx::train_full_batch(kind, tc.dataset, splits[0], grid, cfg);
    TrainConfig mb = cfg;
    mb.batch_fraction = 1.0;
    auto mini = linkx::train_minibatch(kind, tc.dataset, splits[0], grid, mb);
    INFO(linkx::model_kind_name(kind));
    REQUIRE(snapshots_identical(full.snapshot, mini.snapshot));
  }
}

TEST_CASE("minibatch runs are deterministic per seed and clamp oversized batches") {
  auto tc = linkx::generate_two_channel(70, 2, linkx::AdjacencySignal::monophilous,
                                        linkx::FeatureSignal::gaussian, 0.3, 59);
  auto splits = linkx::make_splits(70, 43, 1);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 47;
  cfg.batch_fraction = 0.1;
  std::vector<GridPoint> grid{{.hidden = 4, .layers = 1}};
  auto a = linkx::train_minibatch(ModelKind::linkx, tc.dataset, splits[0], grid, cfg);
  auto b = linkx::train_minibatch(ModelKind::linkx, tc.dataset, splits[0], grid, cfg);
  REQUIRE(a.test_metric == b.test_metric);
  REQUIRE(snapshots_identical(a.snapshot, b.snapshot));

  TrainConfig big = cfg;
  big.batch_fraction = 5.0;  // clamped to the full train set
  auto c = linkx::train_minibatch(ModelKind::linkx, tc.dataset, splits[0], grid, big);
  REQUIRE(std::isfinite(c.test_metric));
}

TEST_CASE("unsupported minibatch models raise") {
  auto tc = linkx::generate_two_channel(50, 2, linkx::AdjacencySignal::none,
                                        linkx::FeatureSignal::gaussian, 0.2, 61);
  auto splits = linkx::make_splits(50, 53, 1);
  TrainConfig cfg;
  cfg.seed = 1;
  std::vector<GridPoint> grid{{}};
  for (ModelKind kind : {ModelKind::labelprop, ModelKind::sgc, ModelKind::concat_mlp}) {
    REQUIRE_THROWS_AS(linkx::train_minibatch(kind, tc.dataset, splits[0], grid, cfg),
                      std::invalid_argument);
  }
}

TEST_CASE("LINK beats MLP by at least 20 points on the monophilous graph at n=2000") {
  auto tc = linkx::generate_two_channel(2000, 2, linkx::AdjacencySignal::monophilous,
                                        linkx::FeatureSignal::none, 0.0, 67);
  auto splits = linkx::make_splits(2000, 59, 1);
  TrainConfig cfg;
  cfg.epochs = 500;
  cfg.seed = 61;
  std::vector<GridPoint> link_grid{{.weight_decay = 0.001}};
  auto link = linkx::train_full_batch(ModelKind::link, tc.dataset, splits[0], link_grid, cfg);
  std::vector<GridPoint> mlp_grid{{.hidden = 16, .layers = 2}};
  auto mlp = linkx::train_full_batch(ModelKind::mlp, tc.dataset, splits[0], mlp_grid, cfg);
  INFO("link=" << link.test_metric << " mlp=" << mlp.test_metric);
  REQUIRE(link.test_metric >= mlp.test_metric + 0.20);
}

TEST_CASE("LINKX reaches 100% test accuracy on noiseless separable features, every split") {
  // at this size the exactly separable feature path wins by epoch ~2 and the
  // label-independent adjacency branch never tips a test node
  auto tc = linkx::generate_two_channel(2000, 2, linkx::AdjacencySignal::none,
                                        linkx::FeatureSignal::gaussian, 0.0, 68);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 62;
  std::vector<GridPoint> grid{{.hidden = 16, .layers = 2}};
  for (const auto& split : linkx::make_splits(2000, 62, 5)) {
    auto res = linkx::train_full_batch(ModelKind::linkx, tc.dataset, split, grid, cfg);
    REQUIRE(res.test_metric == 1.0);
  }
}

TEST_CASE("default search grids match the documented spaces") {
  REQUIRE(linkx::default_grid(ModelKind::mlp).size() == 10);      // 5 hidden x 2 layers
  REQUIRE(linkx::default_grid(ModelKind::linkx).size() == 12);    // 4 hidden x 3 layers
  REQUIRE(linkx::default_grid(ModelKind::concat_mlp).size() == 12);
  REQUIRE(linkx::default_grid(ModelKind::link).size() == 3);      // 3 weight decays
  REQUIRE(linkx::default_grid(ModelKind::sgc).size() == 3);
  REQUIRE(linkx::default_grid(ModelKind::labelprop).size() == 7); // 7 alphas
  auto lp = linkx::default_grid(ModelKind::labelprop);
  REQUIRE(lp.front().alpha == 0.01);
  REQUIRE(lp.back().alpha == 0.99);
  auto lx = linkx::default_grid(ModelKind::linkx);
  REQUIRE(lx.front().hidden == 16);
  REQUIRE(lx.back().hidden == 256);
  REQUIRE(lx.back().layers == 3);
}

TEST_CASE("roc_auc metric flows through training on a binary problem") {
  auto tc = linkx::generate_two_channel(100, 2, linkx::AdjacencySignal::none,
                                        linkx::FeatureSignal::gaussian, 0.3, 71);
  auto splits = linkx::make_splits(100, 67, 1);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.seed = 71;
  cfg.metric = Metric::roc_auc;
  std::vector<GridPoint> grid{{.hidden = 8, .layers = 2}};
  auto res = linkx::train_full_batch(ModelKind::mlp, tc.dataset, splits[0], grid, cfg);
  REQUIRE(res.test_metric > 0.5);
  REQUIRE(res.test_metric <= 1.0);
}
