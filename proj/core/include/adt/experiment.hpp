#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adt/colliding.hpp"
#include "adt/dataset.hpp"
#include "adt/denoise.hpp"
#include "adt/eval.hpp"
#include "adt/model.hpp"
#include "adt/train.hpp"

namespace adt::experiment {

/// Canned experiment designs; each expands to a fixed list of arms that share
/// the per-seed dataset.
enum class Template {
  kCleanVsNormal,  // CE on the noisy corpus vs CE on the clean subset
  kAdtCompare,     // CE vs T-CE vs R-CE
  kExtraFeedback,  // denoising alone vs +finetune vs +warm-up
  kColliding,      // warm-up alone vs warm-up + colliding inference
};

std::string to_string(Template t);
Template template_from_string(const std::string& name);

std::string strategy_name(denoise::LossStrategy s);
denoise::LossStrategy strategy_from_string(const std::string& name);

struct ExperimentConfig {
  Template tmpl = Template::kAdtCompare;

  // Data source. An empty dataset_path selects the synthetic generator.
  std::string dataset_path;
  data::ColumnSpec columns;
  std::int32_t synth_users = 2000;
  std::int32_t synth_items = 1000;
  int synth_latent = 8;
  double synth_density = 0.02;
  data::SplitRatios split;
  double noise_rate = 0.3;
  /// Fraction of true-positive train records revealed as reliable feedback
  /// (extra-feedback / colliding templates).
  double extra_fraction = 0.1;

  model::ModelConfig model{.kind = model::ModelKind::kGmf, .factors = 32};
  denoise::LossStrategy strategy = denoise::LossStrategy::kTruncatedCe;
  double epsilon_max = 0.2;
  std::int64_t epsilon_n = 1000;
  double beta = 1.0;

  double learning_rate = 0.001;
  int batch_size = 1024;
  int negative_ratio = 1;
  /// Long enough that plain CE training is past its clean-test peak (the
  /// noise-memorisation regime the denoising strategies target).
  int epochs = 100;
  /// Warm-up/finetune extra-feedback phases default to one pass over the
  /// reliable records; the colliding preset lengthens the warm-up because the
  /// neighbour index is built from the warm representations.
  int warmup_epochs = 1;
  int finetune_epochs = 1;

  colliding::CollidingConfig colliding;

  std::vector<int> eval_ks = {20, 50};
  int activity_groups = 0;

  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string out_dir = "out";
};

/// Template presets on top of the struct defaults.
ExperimentConfig default_config(Template t);

/// Parses a "key = value" config file (# starts a comment). Unknown keys and
/// unparseable values raise std::invalid_argument naming the offender.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_options(ExperimentConfig& config,
                   const std::map<std::string, std::string>& options);

/// "N" -> {1..N}, or an explicit comma-separated list.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

std::string config_hash(const ExperimentConfig& config);

/// Synthesis/loading, holdout split, noise injection and extra-feedback reveal
/// for one seed, in that order.
data::Dataset build_dataset(const ExperimentConfig& config, std::uint64_t seed);

std::int64_t iterations_for_epochs(std::size_t pool_size, int batch_size, int epochs);

/// TrainConfig for one arm of this experiment.
train::TrainConfig make_train_config(const ExperimentConfig& config,
                                     denoise::LossStrategy strategy, std::uint64_t seed,
                                     std::int64_t max_iterations);

struct ArmOutput {
  std::string name;
  eval::EvalReport report;
  train::LossCurveLog loss_log;
  train::DropLog drop_log;
  /// Metrics over the low-ratio (gated) users, for the colliding template.
  std::optional<eval::MetricTable> gated;
};

struct SeedOutput {
  std::uint64_t seed = 0;
  std::vector<ArmOutput> arms;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedOutput> seeds;
};

/// Runs every arm of the configured template for every seed. Failures carry
/// the stage name ("dataset", "train:<arm>", "evaluate:<arm>").
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes summary.json, summary.txt and per-seed report.json / loss_curve.csv /
/// drop_diag.csv under out_dir. Output bytes depend only on `result`.
void emit_report(const ExperimentResult& result, const std::string& out_dir);

/// Aggregated per-arm metric across seeds (used by emit_report and tests).
struct MetricSummary {
  double mean = 0;
  double stddev = 0;  // sample std; 0 when fewer than two seeds
  std::vector<double> per_seed;
};
MetricSummary summarize(const std::vector<double>& per_seed);

}  // namespace adt::experiment
