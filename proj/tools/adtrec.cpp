// Experiment runner: synthesises (or loads) an interaction corpus, trains the
// configured arms over several seeds and writes aggregate reports.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "adt/experiment.hpp"

namespace expt = adt::experiment;

int main(int argc, char** argv) {
  CLI::App app{"denoising recommender experiment runner"};

  std::optional<std::string> config_path, template_name, seeds, out_dir, model_name,
      strategy_name, dataset_path;
  std::optional<double> epsilon_max, beta, lambda, ratio_threshold, noise_rate, density,
      extra_fraction, learning_rate;
  std::optional<std::int64_t> epsilon_n;
  std::optional<int> neighbors, epochs, warmup_epochs, finetune_epochs, batch_size,
      users, items, activity_groups;

  app.add_option("--config", config_path, "key = value experiment config file");
  app.add_option("--template", template_name,
                 "clean-vs-normal | adt-compare | extra-feedback | colliding");
  app.add_option("--seeds", seeds, "seed count N (runs 1..N) or comma-separated list");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--epsilon-max", epsilon_max, "truncation drop-rate cap");
  app.add_option("--epsilon-n", epsilon_n, "iterations until the cap is reached");
  app.add_option("--beta", beta, "reweighting exponent");
  app.add_option("--lambda", lambda, "own-score weight for colliding inference");
  app.add_option("--neighbors", neighbors, "neighbour count for colliding inference");
  app.add_option("--ratio-threshold", ratio_threshold,
                 "extra-feedback ratio below which fusion applies");
  app.add_option("--model", model_name, "gmf | neumf | cdae");
  app.add_option("--strategy", strategy_name, "ce | t-ce | r-ce");
  app.add_option("--dataset", dataset_path, "TSV interaction log (default: synthetic)");
  app.add_option("--users", users, "synthetic user count");
  app.add_option("--items", items, "synthetic item count");
  app.add_option("--density", density, "synthetic positive density");
  app.add_option("--noise-rate", noise_rate, "injected false-positive rate");
  app.add_option("--extra-fraction", extra_fraction, "revealed extra-feedback fraction");
  app.add_option("--epochs", epochs, "training epochs");
  app.add_option("--warmup-epochs", warmup_epochs, "warm-up phase epochs");
  app.add_option("--finetune-epochs", finetune_epochs, "finetune phase epochs");
  app.add_option("--batch-size", batch_size, "positives per batch");
  app.add_option("--learning-rate", learning_rate, "Adam learning rate");
  app.add_option("--activity-groups", activity_groups,
                 "user groups for the per-activity breakdown (0 = off)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::map<std::string, std::string> file_options;
    if (config_path) file_options = expt::read_config_file(*config_path);

    // The template decides the baseline defaults, so resolve it first:
    // flag > config file > built-in default.
    expt::Template tmpl = expt::Template::kAdtCompare;
    if (const auto it = file_options.find("template"); it != file_options.end())
      tmpl = expt::template_from_string(it->second);
    if (template_name) tmpl = expt::template_from_string(*template_name);

    expt::ExperimentConfig config = expt::default_config(tmpl);
    file_options.erase("template");
    expt::apply_options(config, file_options);

    if (seeds) config.seeds = expt::parse_seeds(*seeds);
    if (out_dir) config.out_dir = *out_dir;
    if (epsilon_max) config.epsilon_max = *epsilon_max;
    if (epsilon_n) config.epsilon_n = *epsilon_n;
    if (beta) config.beta = *beta;
    if (lambda) config.colliding.lambda = *lambda;
    if (neighbors) config.colliding.n_neighbors = *neighbors;
    if (ratio_threshold) config.colliding.ratio_threshold = *ratio_threshold;
    if (model_name) config.model.kind = adt::model::model_kind_from_string(*model_name);
    if (strategy_name) config.strategy = expt::strategy_from_string(*strategy_name);
    if (dataset_path) config.dataset_path = *dataset_path;
    if (users) config.synth_users = *users;
    if (items) config.synth_items = *items;
    if (density) config.synth_density = *density;
    if (noise_rate) config.noise_rate = *noise_rate;
    if (extra_fraction) config.extra_fraction = *extra_fraction;
    if (epochs) config.epochs = *epochs;
    if (warmup_epochs) config.warmup_epochs = *warmup_epochs;
    if (finetune_epochs) config.finetune_epochs = *finetune_epochs;
    if (batch_size) config.batch_size = *batch_size;
    if (learning_rate) config.learning_rate = *learning_rate;
    if (activity_groups) config.activity_groups = *activity_groups;

    const auto result = expt::run_experiment(config);
    expt::emit_report(result, config.out_dir);
    std::cout << "wrote " << config.out_dir << "/summary.json ("
              << result.seeds.size() << " seed(s))\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
