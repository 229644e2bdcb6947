#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peranno/commands.hpp"
#include "peranno/error.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
};

peranno::RunConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return {};
  return peranno::RunConfig::from_file(args.config_path);
}

int run_guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "peranno: per-annotator disagreement modeling toolkit\n"
      "Batch commands over flat key=value config files; every output file\n"
      "embeds the resolved configuration it was produced with."};
  app.require_subcommand(1);

  CommonArgs stats_args, synth_args, train_args, eval_args, compare_args;
  std::string stats_dataset;
  std::uint64_t seed = 0;
  bool constrained = false;
  std::string aggregation;
  std::vector<std::string> compare_reports;

  auto* stats = app.add_subcommand("stats", "Dataset descriptive statistics");
  stats->add_option("dataset", stats_dataset, "Dataset directory");
  stats->add_option("--config", stats_args.config_path, "Config file");
  stats->add_option("--out", stats_args.out_dir, "Output directory");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--config", synth_args.config_path, "Config file");
  auto* synth_seed = synth->add_option("--seed", seed, "Seed override");
  synth->add_option("--out", synth_args.out_dir, "Output directory");

  auto* train = app.add_subcommand("train", "Train a classifier");
  train->add_option("--config", train_args.config_path, "Config file")
      ->required();
  auto* train_seed = train->add_option("--seed", seed, "Seed override");
  train->add_option("--out", train_args.out_dir, "Output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--config", eval_args.config_path, "Config file")
      ->required();
  eval->add_flag("--constrained", constrained,
                 "Predict only from the heads of each instance's annotators");
  auto* eval_agg =
      eval->add_option("--aggregation", aggregation,
                       "Soft-label aggregation: argmax-count or mean-prob");
  eval->add_option("--out", eval_args.out_dir, "Output directory");

  auto* compare = app.add_subcommand("compare", "Compare eval reports");
  compare->add_option("reports", compare_reports, "Eval report files")
      ->expected(-1);
  compare->add_option("--out", compare_args.out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  if (stats->parsed()) {
    return run_guarded([&] {
      auto cfg = load_config(stats_args);
      if (!stats_dataset.empty()) cfg.set("dataset", stats_dataset);
      peranno::cmd_stats(cfg, stats_args.out_dir);
    });
  }
  if (synth->parsed()) {
    return run_guarded([&] {
      auto cfg = load_config(synth_args);
      if (synth_seed->count() > 0) cfg.set("seed", std::to_string(seed));
      peranno::cmd_synth(cfg, synth_args.out_dir);
    });
  }
  if (train->parsed()) {
    return run_guarded([&] {
      auto cfg = load_config(train_args);
      if (train_seed->count() > 0) cfg.set("seed", std::to_string(seed));
      peranno::cmd_train(cfg, train_args.out_dir);
    });
  }
  if (eval->parsed()) {
    return run_guarded([&] {
      auto cfg = load_config(eval_args);
      if (constrained) cfg.set("constrained", "true");
      if (eval_agg->count() > 0) cfg.set("aggregation", aggregation);
      peranno::cmd_eval(cfg, eval_args.out_dir);
    });
  }
  if (compare->parsed()) {
    return run_guarded([&] {
      std::vector<std::filesystem::path> paths(compare_reports.begin(),
                                               compare_reports.end());
      peranno::cmd_compare(paths, compare_args.out_dir);
    });
  }
  return 1;
}
