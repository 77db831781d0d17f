#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkx/homophily.hpp"
#include "linkx/io.hpp"
#include "linkx/synth.hpp"
#include "linkx/train.hpp"

namespace linkx::cli {

// Exit codes: 0 success, 1 usage or runtime error, 2 malformed dataset.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBadDataset = 2;

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOptions {
  std::string dataset_dir;
  bool symmetrize = false;
  std::int64_t two_hop_samples = 0;  // 0 = skip the two-hop estimate
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

inline nlohmann::json report_to_json(const HomophilyReport& r, const Dataset& data) {
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"n", data.graph.n},
                   {"directed", data.graph.directed},
                   {"num_stored_edges", data.graph.num_stored_edges()},
                   {"num_classes", r.num_classes},
                   {"isolated_nodes", r.isolated_nodes},
                   {"edge_homophily", r.edge_homophily},
                   {"node_homophily", r.node_homophily},
                   {"class_fractions", r.class_fractions},
                   {"masked_classes", r.masked_classes}};
  if (r.improved.has_value()) {
    j["improved_homophily"] = *r.improved;
  } else {
    j["improved_homophily"] = nullptr;
    j["improved_homophily_undefined_reason"] = "undefined for a single-class graph";
  }
  nlohmann::json class_wise = nlohmann::json::array();
  for (double hk : r.class_wise) {
    if (std::isnan(hk)) class_wise.push_back(nullptr);
    else class_wise.push_back(hk);
  }
  j["class_wise_homophily"] = class_wise;
  return j;
}

inline int run_stats(const StatsOptions& opts) {
  try {
    Dataset data = load_dataset(opts.dataset_dir, opts.symmetrize);
    validate_dataset(data);
    HomophilyReport report = homophily_report(data.graph, data.labels);
    nlohmann::json j = report_to_json(report, data);
    if (opts.two_hop_samples > 0) {
      j["two_hop_node_homophily"] = two_hop_node_homophily(data.graph, data.labels,
                                                           opts.two_hop_samples, opts.seed);
      j["two_hop_samples"] = std::min<std::int64_t>(opts.two_hop_samples, data.graph.n);
      j["seed"] = opts.seed;
    }
    CompatibilityMatrix compat = compatibility_matrix(data.graph, data.labels);
    std::string csv;
    for (std::int64_t k = 0; k < compat.values.rows(); ++k) {
      for (std::int64_t l = 0; l < compat.values.cols(); ++l) {
        if (l > 0) csv += ',';
        csv += ioutil::format_double(compat.values(k, l));
      }
      csv += '\n';
    }
    std::filesystem::create_directories(opts.out_dir);
    ioutil::write_file(std::filesystem::path(opts.out_dir) / "homophily.json", j.dump(2) + "\n");
    ioutil::write_file(std::filesystem::path(opts.out_dir) / "compatibility.csv", csv);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  } catch (const DatasetFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadDataset;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string kind;  // pure-homophily | pure-heterophily | one-per-class | er |
                     // planted-partition | two-channel
  std::int32_t n = 0;
  std::int32_t classes = 2;
  double p = 0.25;
  double q = 0.0;
  std::vector<double> fractions;
  std::string adjacency_signal = "monophilous";
  std::string feature_signal = "none";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
};

inline AdjacencySignal parse_adjacency_signal(const std::string& s) {
  if (s == "none") return AdjacencySignal::none;
  if (s == "monophilous") return AdjacencySignal::monophilous;
  if (s == "heterophilous") return AdjacencySignal::heterophilous;
  throw std::invalid_argument("unknown adjacency signal: " + s);
}

inline FeatureSignal parse_feature_signal(const std::string& s) {
  if (s == "none") return FeatureSignal::none;
  if (s == "gaussian") return FeatureSignal::gaussian;
  throw std::invalid_argument("unknown feature signal: " + s);
}

inline int run_synth(const SynthOptions& opts) {
  try {
    Dataset data;
    nlohmann::json provenance{{"kind", opts.kind},
                              {"n", opts.n},
                              {"classes", opts.classes},
                              {"seed", opts.seed},
                              {"tool_version", kToolVersion}};
    if (opts.kind == "two-channel") {
      auto tc = generate_two_channel(opts.n, opts.classes, parse_adjacency_signal(opts.adjacency_signal),
                                     parse_feature_signal(opts.feature_signal), opts.noise, opts.seed);
      data = std::move(tc.dataset);
      provenance["adjacency_signal"] = opts.adjacency_signal;
      provenance["feature_signal"] = opts.feature_signal;
      provenance["noise"] = opts.noise;
    } else {
      SynthSpec spec;
      spec.n = opts.n;
      spec.num_classes = opts.classes;
      spec.p = opts.p;
      spec.q = opts.q;
      spec.class_fractions = opts.fractions;
      spec.seed = opts.seed;
      if (opts.kind == "pure-homophily") spec.kind = SynthKind::pure_homophily;
      else if (opts.kind == "pure-heterophily") spec.kind = SynthKind::pure_heterophily;
      else if (opts.kind == "one-per-class") spec.kind = SynthKind::one_per_class;
      else if (opts.kind == "er") spec.kind = SynthKind::erdos_renyi;
      else if (opts.kind == "planted-partition") spec.kind = SynthKind::planted_partition;
      else throw std::invalid_argument("unknown synth kind: " + opts.kind);
      if (spec.kind == SynthKind::erdos_renyi || spec.kind == SynthKind::planted_partition) {
        provenance["p"] = opts.p;
        if (spec.kind == SynthKind::planted_partition) provenance["q"] = opts.q;
      }
      if (!opts.fractions.empty()) provenance["fractions"] = opts.fractions;
      data = generate_synth(spec);
    }
    save_dataset(opts.out_dir, data, provenance);
    std::cout << "wrote dataset: " << opts.out_dir << " (n=" << data.graph.n
              << ", stored_edges=" << data.graph.num_stored_edges() << ")\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::string dataset_dir;
  std::string model = "linkx";
  std::string batch = "full";  // full | iid
  int splits = 5;
  std::uint64_t seed = 0;
  std::string metric = "accuracy";  // accuracy | auc
  int epochs = 500;
  bool symmetrize = false;
  std::vector<std::int64_t> hidden;   // empty = model default grid
  std::vector<int> layers;
  std::vector<double> weight_decay;
  std::vector<double> alpha;
  double lr = 0.01;
  int hops = 1;
  bool link_bias = false;
  std::string normalization = "sym";
  double batch_fraction = 0.1;
  int steps_per_epoch = 1;
  int workers = 1;
  std::string out_dir = "run";
  std::vector<GridPoint> explicit_grid;  // set when replaying a manifest
};

inline std::vector<GridPoint> build_grid(ModelKind kind, const TrainOptions& opts) {
  if (!opts.explicit_grid.empty()) return opts.explicit_grid;
  auto grid = default_grid(kind);
  const bool searches_dims = kind == ModelKind::mlp || kind == ModelKind::linkx ||
                             kind == ModelKind::concat_mlp;
  const bool searches_wd = kind == ModelKind::link || kind == ModelKind::sgc;
  if (opts.hidden.empty() && opts.layers.empty() && opts.weight_decay.empty() &&
      opts.alpha.empty()) {
    for (auto& p : grid) p.lr = opts.lr;
    return grid;
  }
  // unique values in first-occurrence order
  auto uniqued = [](auto values) {
    auto out = values;
    out.clear();
    for (const auto& v : values)
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
  };
  std::vector<std::int64_t> hidden = opts.hidden;
  std::vector<int> layers = opts.layers;
  std::vector<double> wd = opts.weight_decay;
  std::vector<double> alpha = opts.alpha;
  if (hidden.empty()) {
    if (searches_dims) for (const auto& p : grid) hidden.push_back(p.hidden);
    else hidden.push_back(GridPoint{}.hidden);
  }
  if (layers.empty()) {
    if (searches_dims) for (const auto& p : grid) layers.push_back(p.layers);
    else layers.push_back(GridPoint{}.layers);
  }
  if (wd.empty()) {
    if (searches_wd) for (const auto& p : grid) wd.push_back(p.weight_decay);
    else wd.push_back(GridPoint{}.weight_decay);
  }
  if (alpha.empty()) {
    if (kind == ModelKind::labelprop) for (const auto& p : grid) alpha.push_back(p.alpha);
    else alpha.push_back(GridPoint{}.alpha);
  }
  hidden = uniqued(hidden);
  layers = uniqued(layers);
  wd = uniqued(wd);
  alpha = uniqued(alpha);
  std::vector<GridPoint> out;
  for (auto h : hidden)
    for (auto l : layers)
      for (auto w : wd)
        for (auto a : alpha)
          out.push_back({.hidden = h, .layers = l, .lr = opts.lr, .weight_decay = w, .alpha = a});
  return out;
}

inline nlohmann::json grid_point_json(const GridPoint& p) {
  return {{"hidden", p.hidden},
          {"layers", p.layers},
          {"lr", p.lr},
          {"weight_decay", p.weight_decay},
          {"alpha", p.alpha}};
}

inline GridPoint grid_point_from_json(const nlohmann::json& j) {
  GridPoint p;
  p.hidden = j.at("hidden").get<std::int64_t>();
  p.layers = j.at("layers").get<int>();
  p.lr = j.at("lr").get<double>();
  p.weight_decay = j.at("weight_decay").get<double>();
  p.alpha = j.at("alpha").get<double>();
  return p;
}

inline nlohmann::json train_manifest(const TrainOptions& opts, std::span<const GridPoint> grid,
                                     const std::string& checksum) {
  nlohmann::json grid_json = nlohmann::json::array();
  for (const auto& p : grid) grid_json.push_back(grid_point_json(p));
  return nlohmann::json{
      {"schema_version", kSchemaVersion},
      {"tool_version", kToolVersion},
      {"subcommand", "train"},
      {"seed", opts.seed},
      {"dataset_dir", std::filesystem::absolute(opts.dataset_dir).string()},
      {"dataset_checksum", checksum},
      {"config",
       {{"model", opts.model},
        {"batch", opts.batch},
        {"splits", opts.splits},
        {"metric", opts.metric},
        {"epochs", opts.epochs},
        {"symmetrize", opts.symmetrize},
        {"grid", grid_json},
        {"lr", opts.lr},
        {"hops", opts.hops},
        {"link_bias", opts.link_bias},
        {"normalization", opts.normalization},
        {"batch_fraction", opts.batch_fraction},
        {"steps_per_epoch", opts.steps_per_epoch}}},
      {"artifacts",
       {{"results", "results.json"},
        {"timing", "timing.json"},
        {"checkpoint_prefix", "checkpoint_split"}}}};
}

inline TrainOptions train_options_from_manifest(const std::string& manifest_path,
                                                const std::string& out_dir_override = "") {
  nlohmann::json m = nlohmann::json::parse(ioutil::read_file(manifest_path));
  if (m.at("subcommand").get<std::string>() != "train")
    throw std::invalid_argument("manifest is not a train manifest");
  TrainOptions opts;
  const auto& c = m.at("config");
  opts.dataset_dir = m.at("dataset_dir").get<std::string>();
  opts.seed = m.at("seed").get<std::uint64_t>();
  opts.model = c.at("model").get<std::string>();
  opts.batch = c.at("batch").get<std::string>();
  opts.splits = c.at("splits").get<int>();
  opts.metric = c.at("metric").get<std::string>();
  opts.epochs = c.at("epochs").get<int>();
  opts.symmetrize = c.at("symmetrize").get<bool>();
  opts.lr = c.at("lr").get<double>();
  opts.hops = c.at("hops").get<int>();
  opts.link_bias = c.at("link_bias").get<bool>();
  opts.normalization = c.at("normalization").get<std::string>();
  opts.batch_fraction = c.at("batch_fraction").get<double>();
  opts.steps_per_epoch = c.at("steps_per_epoch").get<int>();
  // the resolved grid is replayed exactly
  for (const auto& pj : c.at("grid")) opts.explicit_grid.push_back(grid_point_from_json(pj));
  opts.out_dir = out_dir_override.empty() ? m.value("out_dir", "run_replay") : out_dir_override;
  return opts;
}

inline int run_train(const TrainOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  try {
    ModelKind kind = model_kind_from_name(opts.model);
    const bool iid = opts.batch == "iid";
    if (!iid && opts.batch != "full")
      throw std::invalid_argument("batch must be 'full' or 'iid', got '" + opts.batch + "'");
    if (iid && kind == ModelKind::labelprop)
      throw std::invalid_argument("label propagation requires full-graph propagation");
    if (iid && kind == ModelKind::sgc)
      throw std::invalid_argument("sgc requires full-graph propagation");
    if (iid && kind == ModelKind::concat_mlp)
      throw std::invalid_argument("concat-mlp does not support i.i.d. minibatch training");
    Metric metric;
    if (opts.metric == "accuracy") metric = Metric::accuracy;
    else if (opts.metric == "auc") metric = Metric::roc_auc;
    else throw std::invalid_argument("metric must be 'accuracy' or 'auc'");

    Dataset data = load_dataset(opts.dataset_dir, opts.symmetrize);
    validate_dataset(data);
    if (metric == Metric::roc_auc && data.labels.num_classes != 2)
      throw std::invalid_argument("auc metric requires a binary dataset");

    auto grid = build_grid(kind, opts);
    const std::string checksum = checksum_hex(dataset_checksum(opts.dataset_dir));

    std::filesystem::create_directories(opts.out_dir);
    nlohmann::json manifest = train_manifest(opts, grid, checksum);
    manifest["out_dir"] = std::filesystem::absolute(opts.out_dir).string();
    ioutil::write_file(std::filesystem::path(opts.out_dir) / "manifest.json",
                       manifest.dump(2) + "\n");

    TrainConfig cfg;
    cfg.epochs = opts.epochs;
    cfg.seed = opts.seed;
    cfg.metric = metric;
    cfg.hops = opts.hops;
    cfg.link_bias = opts.link_bias;
    cfg.normalization = opts.normalization == "row" ? PropNorm::row : PropNorm::sym;
    cfg.batch_fraction = opts.batch_fraction;
    cfg.steps_per_epoch = opts.steps_per_epoch;
    cfg.workers = opts.workers;

    auto splits = make_splits(data.n(), opts.seed, opts.splits);
    nlohmann::json split_results = nlohmann::json::array();
    std::vector<double> test_metrics;
    for (const auto& split : splits) {
      TrainResult res = iid ? train_minibatch(kind, data, split, grid, cfg)
                            : train_full_batch(kind, data, split, grid, cfg);
      test_metrics.push_back(res.test_metric);

      CheckpointInfo ck;
      ck.snapshot = res.snapshot;
      ck.metric = metric;
      ck.seed = opts.seed;
      ck.split_seed = split.seed;
      ck.split_index = split.index;
      ck.split_count = opts.splits;
      ck.n = data.n();
      ck.feature_dim = data.feature_dim();
      ck.num_classes = data.labels.num_classes;
      ck.hops = opts.hops;
      ck.prop_iterations = cfg.prop_iterations;
      ck.link_bias = opts.link_bias;
      ck.normalization = cfg.normalization;
      ck.dataset_checksum = checksum;
      ck.recorded_test_metric = res.test_metric;
      save_checkpoint(std::filesystem::path(opts.out_dir) /
                          ("checkpoint_split" + std::to_string(split.index)),
                      ck);

      nlohmann::json grid_json = nlohmann::json::array();
      for (const auto& gp : res.grid) {
        nlohmann::json gj{{"point", grid_point_json(gp.point)},
                          {"failed", gp.failed},
                          {"best_val", gp.best_val},
                          {"best_epoch", gp.best_epoch},
                          {"train_loss", gp.train_loss},
                          {"val_metric", gp.val_metric}};
        if (gp.failed) gj["fail_reason"] = gp.fail_reason;
        grid_json.push_back(gj);
      }
      split_results.push_back({{"split_index", split.index},
                               {"selected_grid_index", res.selected_grid_index},
                               {"selected_epoch", res.selected_epoch},
                               {"train_metric", res.train_metric},
                               {"val_metric", res.val_metric},
                               {"test_metric", res.test_metric},
                               {"grid", grid_json}});
      std::cout << "split " << split.index << ": test " << opts.metric << " = "
                << res.test_metric << "\n";
    }
    double mean = 0.0;
    for (double t : test_metrics) mean += t;
    mean /= static_cast<double>(test_metrics.size());
    double var = 0.0;
    for (double t : test_metrics) var += (t - mean) * (t - mean);
    var /= static_cast<double>(test_metrics.size());
    const double stddev = std::sqrt(var);

    nlohmann::json results{{"schema_version", kSchemaVersion},
                           {"model", opts.model},
                           {"batch", opts.batch},
                           {"metric", opts.metric},
                           {"seed", opts.seed},
                           {"dataset_checksum", checksum},
                           {"splits", split_results},
                           {"test_mean", mean},
                           {"test_std", stddev}};
    ioutil::write_file(std::filesystem::path(opts.out_dir) / "results.json",
                       results.dump(2) + "\n");
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
    ioutil::write_file(std::filesystem::path(opts.out_dir) / "timing.json",
                       nlohmann::json{{"wall_time_ms", ms}}.dump(2) + "\n");
    std::cout << "mean test " << opts.metric << " = " << mean << " +/- " << stddev << "\n";
    return kExitOk;
  } catch (const DatasetFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadDataset;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string checkpoint_dir;
  std::string dataset_dir;
  std::optional<std::uint64_t> split_seed;  // defaults to the recorded seed
  std::optional<int> split_index;
  bool symmetrize = false;
  std::string out_path;  // optional metrics JSON path
};

// Recomputes the test metric for a stored snapshot on the given split.
inline double evaluate_snapshot(const Dataset& data, const CheckpointInfo& info, const Split& split) {
  if (info.snapshot.kind == ModelKind::labelprop) {
    std::vector<std::int32_t> seed_labels(static_cast<std::size_t>(data.n()), -1);
    for (std::int32_t u : split.train) seed_labels[static_cast<std::size_t>(u)] = data.labels.values[u];
    PropagationConfig pcfg;
    pcfg.alpha = info.snapshot.point.alpha;
    pcfg.hops = info.hops;
    pcfg.iterations = info.prop_iterations;
    pcfg.normalization = info.normalization;
    DenseMatrix soft = label_propagation(data.graph, seed_labels, data.labels.num_classes, pcfg);
    return eval_metric(info.metric, soft, data.labels.values, split.test);
  }
  TrainConfig cfg;
  cfg.hops = info.hops;
  cfg.link_bias = info.link_bias;
  cfg.normalization = info.normalization;
  Rng dummy(0);
  auto model = detail::make_trainable(info.snapshot.kind, data, info.snapshot.point, cfg, dummy);
  auto params = model->params();
  detail::restore_params(params, info.snapshot);
  NodeBatch test_batch =
      make_batch(data, split.test, model->needs_adjacency(), model->feature_source());
  return eval_metric(info.metric, softmax_columns(model->predict(test_batch)), test_batch.labels);
}

inline int run_eval(const EvalOptions& opts) {
  try {
    CheckpointInfo info = load_checkpoint(opts.checkpoint_dir);
    Dataset data = load_dataset(opts.dataset_dir, opts.symmetrize);
    validate_dataset(data);
    if (data.n() != info.n || data.feature_dim() != info.feature_dim ||
        data.labels.num_classes != info.num_classes)
      throw std::invalid_argument(
          "dimension mismatch: checkpoint expects n=" + std::to_string(info.n) +
          " feature_dim=" + std::to_string(info.feature_dim) +
          " classes=" + std::to_string(info.num_classes) + ", dataset has n=" +
          std::to_string(data.n()) + " feature_dim=" + std::to_string(data.feature_dim()) +
          " classes=" + std::to_string(data.labels.num_classes));
    const std::string checksum = checksum_hex(dataset_checksum(opts.dataset_dir));
    if (checksum != info.dataset_checksum)
      throw std::invalid_argument("dataset checksum mismatch: checkpoint was trained on " +
                                  info.dataset_checksum + ", directory hashes to " + checksum);

    const std::uint64_t split_seed = opts.split_seed.value_or(info.split_seed);
    const int split_index = opts.split_index.value_or(info.split_index);
    if (split_index < 0 || split_index >= info.split_count)
      throw std::invalid_argument("split index out of range");
    auto splits = make_splits(data.n(), split_seed, info.split_count);
    const Split& split = splits[static_cast<std::size_t>(split_index)];

    const double test = evaluate_snapshot(data, info, split);
    const bool split_matches = split_seed == info.split_seed && split_index == info.split_index;
    nlohmann::json j{{"schema_version", kSchemaVersion},
                     {"model", model_kind_name(info.snapshot.kind)},
                     {"metric", info.metric == Metric::accuracy ? "accuracy" : "auc"},
                     {"test_metric", test},
                     {"recorded_test_metric", info.recorded_test_metric},
                     {"matches_recorded", test == info.recorded_test_metric},
                     {"split", {{"seed", split_seed}, {"index", split_index}}},
                     {"split_matches_training", split_matches}};
    if (!opts.out_path.empty()) ioutil::write_file(opts.out_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  } catch (const DatasetFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadDataset;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace linkx::cli
