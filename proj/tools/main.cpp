#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "linkx/cli.hpp"

namespace {

int env_workers() {
  const char* w = std::getenv("LINKX_WORKERS");
  if (!w) return 1;
  int v = std::atoi(w);
  return v >= 1 ? v : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"node classification on non-homophilous graphs: homophily "
               "diagnostics, synthetic generators, and simple scalable models"};
  app.require_subcommand(1);

  linkx::cli::StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "homophily report and compatibility matrix");
  stats_cmd->add_option("dataset", stats.dataset_dir, "dataset directory")->required();
  stats_cmd->add_flag("--symmetrize", stats.symmetrize, "treat the graph as undirected");
  stats_cmd->add_option("--two-hop-samples", stats.two_hop_samples,
                        "Monte-Carlo sample count for the two-hop measure (>= n runs exact)");
  stats_cmd->add_option("--seed", stats.seed, "seed for two-hop sampling");
  stats_cmd->add_option("--out", stats.out_dir, "output directory for report files");

  linkx::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset directory");
  synth_cmd
      ->add_option("--kind", synth.kind,
                   "pure-homophily | pure-heterophily | one-per-class | er | "
                   "planted-partition | two-channel")
      ->required();
  synth_cmd->add_option("--n", synth.n, "node count")->required();
  synth_cmd->add_option("--classes", synth.classes, "class count");
  synth_cmd->add_option("--p", synth.p, "edge probability (within-class for planted-partition)");
  synth_cmd->add_option("--q", synth.q, "cross-class probability for planted-partition");
  synth_cmd->add_option("--fractions", synth.fractions, "class fractions (must sum to 1)")
      ->delimiter(',');
  synth_cmd->add_option("--adj", synth.adjacency_signal,
                        "two-channel adjacency signal: none | monophilous | heterophilous");
  synth_cmd->add_option("--feat", synth.feature_signal,
                        "two-channel feature signal: none | gaussian");
  synth_cmd->add_option("--noise", synth.noise, "two-channel noise level in [0,1]");
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->required();
  synth_cmd->add_option("--out", synth.out_dir, "output dataset directory")->required();

  linkx::cli::TrainOptions train;
  std::string from_manifest;
  auto* train_cmd = app.add_subcommand("train", "grid-search training with best-val selection");
  auto* dataset_opt = train_cmd->add_option("dataset", train.dataset_dir, "dataset directory");
  train_cmd->add_option("--model", train.model,
                        "mlp | link | linkx | concat-mlp | labelprop | sgc");
  train_cmd->add_option("--batch", train.batch, "full | iid");
  train_cmd->add_option("--splits", train.splits, "number of 50/25/25 splits");
  auto* seed_opt = train_cmd->add_option("--seed", train.seed, "root seed (required)");
  train_cmd->add_option("--metric", train.metric, "accuracy | auc");
  train_cmd->add_option("--epochs", train.epochs, "training epochs per grid point");
  train_cmd->add_flag("--symmetrize", train.symmetrize, "treat the graph as undirected");
  train_cmd->add_option("--hidden", train.hidden, "hidden dims to search")->delimiter(',');
  train_cmd->add_option("--layers", train.layers, "layer counts to search")->delimiter(',');
  train_cmd->add_option("--wd", train.weight_decay, "weight decays to search")->delimiter(',');
  train_cmd->add_option("--alpha", train.alpha, "label propagation alphas to search")
      ->delimiter(',');
  train_cmd->add_option("--lr", train.lr, "learning rate");
  train_cmd->add_option("--hops", train.hops, "propagation hops for labelprop/sgc (1 or 2)");
  train_cmd->add_flag("--link-bias", train.link_bias, "add a bias term to LINK");
  train_cmd->add_option("--normalization", train.normalization,
                        "labelprop adjacency normalization: sym | row");
  train_cmd->add_option("--batch-fraction", train.batch_fraction,
                        "iid batch size as a fraction of the train set");
  train_cmd->add_option("--steps-per-epoch", train.steps_per_epoch,
                        "optimizer steps per epoch in iid mode");
  train_cmd->add_option("--out", train.out_dir, "output directory");
  train_cmd->add_option("--from-manifest", from_manifest,
                        "replay a previous run's manifest.json (ignores other options)");

  linkx::cli::EvalOptions eval;
  std::uint64_t eval_split_seed = 0;
  int eval_split_index = 0;
  auto* eval_cmd = app.add_subcommand("eval", "recompute a checkpoint's test metric");
  eval_cmd->add_option("checkpoint", eval.checkpoint_dir, "checkpoint directory")->required();
  eval_cmd->add_option("dataset", eval.dataset_dir, "dataset directory")->required();
  auto* ss = eval_cmd->add_option("--split-seed", eval_split_seed,
                                  "split seed (defaults to the recorded one)");
  auto* si = eval_cmd->add_option("--split-index", eval_split_index,
                                  "split index (defaults to the recorded one)");
  eval_cmd->add_flag("--symmetrize", eval.symmetrize, "treat the graph as undirected");
  eval_cmd->add_option("--out", eval.out_path, "also write the metrics JSON here");

  CLI11_PARSE(app, argc, argv);

  if (stats_cmd->parsed()) return linkx::cli::run_stats(stats);
  if (synth_cmd->parsed()) return linkx::cli::run_synth(synth);
  if (train_cmd->parsed()) {
    train.workers = env_workers();
    if (!from_manifest.empty()) {
      try {
        std::string out_override = train_cmd->count("--out") > 0 ? train.out_dir : "";
        linkx::cli::TrainOptions replay =
            linkx::cli::train_options_from_manifest(from_manifest, out_override);
        replay.workers = train.workers;
        return linkx::cli::run_train(replay);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return linkx::cli::kExitError;
      }
    }
    if (!*dataset_opt) {
      std::cerr << "error: train requires a dataset directory (or --from-manifest)\n";
      return linkx::cli::kExitError;
    }
    if (!*seed_opt) {
      std::cerr << "error: train requires --seed (no wall-clock default)\n";
      return linkx::cli::kExitError;
    }
    return linkx::cli::run_train(train);
  }
  if (eval_cmd->parsed()) {
    if (*ss) eval.split_seed = eval_split_seed;
    if (*si) eval.split_index = eval_split_index;
    return linkx::cli::run_eval(eval);
  }
  return linkx::cli::kExitError;
}
