#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adt/adam.hpp"
#include "adt/dataset.hpp"
#include "adt/denoise.hpp"
#include "adt/model.hpp"

namespace adt::train {

struct TrainConfig {
  model::ModelConfig model;
  denoise::LossStrategy strategy = denoise::LossStrategy::kCe;
  denoise::DropRateSchedule schedule;  // used by T-CE
  denoise::ReweightConfig reweight;    // used by R-CE
  double learning_rate = 0.001;
  int batch_size = 1024;
  int negative_ratio = 1;
  std::int64_t max_iterations = 1000;
  std::uint64_t seed = 1;
  /// Per-group sample cap for the loss-curve probe.
  int loss_probe_cap = 10000;
  /// Early stopping on validation Recall@eval_k every eval_every_epochs epochs;
  /// 0 disables (the default — fixed-budget runs stay comparable).
  int eval_every_epochs = 0;
  int eval_patience = 0;
  int eval_k = 20;
};

/// Epoch-level means of the *raw* (unweighted) CE loss over fixed probe sets.
/// tp/fp split requires noise flags; NaN marks an empty group.
struct LossGroupRow {
  std::int64_t epoch = 0;
  double tp_mean = 0, fp_mean = 0, pos_mean = 0, neg_mean = 0;
};

struct LossCurveLog {
  std::vector<LossGroupRow> rows;
  /// CSV with header epoch,tp_mean,fp_mean,pos_mean,neg_mean.
  void write_csv(const std::string& path) const;
};

/// Per-iteration truncation diagnostics (what T-CE dropped and what it should
/// have dropped).
struct DropLogEntry {
  std::int64_t iteration = 0;
  std::int64_t epoch = 0;
  std::int32_t n_pos = 0;
  std::int32_t n_fp_pos = 0;      // positives that are known false positives
  std::int32_t n_dropped = 0;
  std::int32_t n_dropped_fp = 0;  // dropped positives that are false positives
  double epsilon = 0;             // drop rate applied this iteration
};

struct DropLog {
  bool has_flags = false;
  std::vector<DropLogEntry> entries;
  void write_csv(const std::string& path) const;
};

/// Fixed record/pair samples whose raw CE loss is averaged once per epoch.
struct LossProbe {
  std::vector<data::InteractionRecord> tp, fp, pos;
  std::vector<std::pair<std::int32_t, std::int32_t>> neg;
};

LossProbe make_loss_probe(const data::Dataset& dataset, std::uint64_t seed, int cap);
LossGroupRow record_loss_groups(const model::ModelSnapshot& snapshot,
                                const data::Dataset& dataset, const LossProbe& probe,
                                std::int64_t epoch);

struct TrainResult {
  model::ModelSnapshot snapshot;
  LossCurveLog loss_log;
  DropLog drop_log;
  std::int64_t iterations_run = 0;
};

/// Mini-batch training over the train partition per the configured strategy.
/// One iteration = one batch of stored positives (epoch-shuffled) plus freshly
/// sampled negatives. The truncation schedule is advanced after each
/// iteration, so iteration T trains with drop rate epsilon(T - 1).
TrainResult train(const data::Dataset& dataset, const TrainConfig& config);

/// Oracle baseline: plain CE on the true-positive train records only.
/// Requires noise flags.
TrainResult train_clean(const data::Dataset& dataset, const TrainConfig& config);

/// Continues from a snapshot with plain CE on the reliable extra-feedback
/// records (negatives still sampled against the full implicit-positive set).
/// config.max_iterations = 0 returns the snapshot unchanged.
model::ModelSnapshot finetune(const model::ModelSnapshot& snapshot,
                              const data::Dataset& dataset, const TrainConfig& config);

struct WarmupResult {
  model::ModelSnapshot warm;  // state after the extra-feedback phase
  TrainResult result;         // denoising phase, started from `warm`
};

/// Phase 1: plain CE on extra-feedback records from a fresh initialisation.
/// Phase 2: the configured strategy over the full train partition, continuing
/// from the warm state. With warmup_config.max_iterations = 0 this reduces
/// exactly to train(dataset, config).
WarmupResult warmup_then_train(const data::Dataset& dataset,
                               const TrainConfig& warmup_config,
                               const TrainConfig& config);

}  // namespace adt::train
