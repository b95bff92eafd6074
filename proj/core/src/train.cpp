#include "adt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "adt/rng.hpp"

namespace adt::train {
namespace {

constexpr std::uint64_t kWarmupLoopStream = 100;
constexpr std::uint64_t kFinetuneLoopStream = 101;

enum class PositiveSource { kAll, kCleanOnly, kExtraOnly };

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate(const TrainConfig& c) {
  if (c.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (c.negative_ratio < 1) throw std::invalid_argument("negative_ratio must be >= 1");
  if (c.learning_rate < 0) throw std::invalid_argument("learning_rate must be >= 0");
  if (c.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (c.loss_probe_cap < 1) throw std::invalid_argument("loss_probe_cap must be >= 1");
}

std::vector<data::InteractionRecord> select_pool(const data::Dataset& dataset,
                                                 PositiveSource source) {
  std::vector<data::InteractionRecord> pool;
  for (const auto& r : dataset.train) {
    switch (source) {
      case PositiveSource::kAll:
        pool.push_back(r);
        break;
      case PositiveSource::kCleanOnly:
        if (r.noise_flag && *r.noise_flag == 1) pool.push_back(r);
        break;
      case PositiveSource::kExtraOnly:
        if (r.extra) pool.push_back(r);
        break;
    }
  }
  return pool;
}

double mean_raw_ce(const model::ModelSnapshot& snap, const data::Dataset& dataset,
                   const std::vector<data::InteractionRecord>& records, double label) {
  if (records.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0;
  for (const auto& r : records)
    sum += denoise::ce_loss(model::predict_pair(snap, dataset, r.user, r.item), label);
  return sum / static_cast<double>(records.size());
}

// Mean validation Recall@k with train positives excluded; used only by the
// optional early-stopping hook.
double validation_recall(const model::ModelSnapshot& snap, const data::Dataset& dataset,
                         int k) {
  std::vector<std::vector<std::int32_t>> relevant(
      static_cast<std::size_t>(dataset.n_users));
  for (const auto& r : dataset.validation)
    relevant[static_cast<std::size_t>(r.user)].push_back(r.item);

  double sum = 0;
  int evaluated = 0;
  for (std::int32_t u = 0; u < dataset.n_users; ++u) {
    const auto& rel = relevant[static_cast<std::size_t>(u)];
    if (rel.empty()) continue;
    const Eigen::VectorXd scores = model::predict_all(snap, dataset, u);
    std::vector<std::pair<double, std::int32_t>> ranked;
    ranked.reserve(static_cast<std::size_t>(dataset.n_items));
    for (std::int32_t i = 0; i < dataset.n_items; ++i)
      if (!dataset.user_has_item(u, i)) ranked.emplace_back(scores(i), i);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                      ranked.end(), [](const auto& a, const auto& b) {
                        return a.first > b.first ||
                               (a.first == b.first && a.second < b.second);
                      });
    int hits = 0;
    for (std::size_t t = 0; t < take; ++t)
      if (std::find(rel.begin(), rel.end(), ranked[t].second) != rel.end()) ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rel.size());
    ++evaluated;
  }
  return evaluated == 0 ? 0.0 : sum / evaluated;
}

struct LoopOutcome {
  model::ModelSnapshot snapshot;
  LossCurveLog loss_log;
  DropLog drop_log;
  std::int64_t iterations_run = 0;
};

LoopOutcome run_loop(const data::Dataset& dataset, const TrainConfig& config,
                     PositiveSource source, const model::ModelSnapshot* init,
                     std::uint64_t loop_stream) {
  validate(config);
  if (dataset.train.empty()) throw std::invalid_argument("dataset has no train records");

  LoopOutcome out;
  out.snapshot = init ? *init
                      : model::init_params(config.model, dataset.n_users, dataset.n_items,
                                           config.seed);
  out.drop_log.has_flags = dataset.has_noise_flags();
  if (config.max_iterations == 0) return out;

  const auto pool = select_pool(dataset, source);
  if (pool.empty())
    throw std::runtime_error("no train records match the requested positive source");

  auto adam = model::AdamState::create(out.snapshot.params,
                                       model::AdamConfig{.learning_rate = config.learning_rate});
  auto rng = make_rng(config.seed, loop_stream);
  const auto probe = make_loss_probe(dataset, config.seed, config.loss_probe_cap);

  std::vector<std::size_t> perm(pool.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  std::size_t cursor = 0;
  std::int64_t completed_epochs = 0;
  double best_recall = -1;
  int stale_evals = 0;

  for (std::int64_t iter = 1; iter <= config.max_iterations; ++iter) {
    if (cursor == 0) std::shuffle(perm.begin(), perm.end(), rng);

    const std::size_t take = std::min<std::size_t>(
        static_cast<std::size_t>(config.batch_size), pool.size() - cursor);
    std::vector<data::InteractionRecord> positives;
    positives.reserve(take);
    for (std::size_t t = 0; t < take; ++t) positives.push_back(pool[perm[cursor + t]]);

    const auto batch =
        data::sample_negatives(std::move(positives), dataset, config.negative_ratio, rng);

    std::vector<double> preds(batch.size()), labels(batch.size());
    {
      std::size_t k = 0;
      for (const auto& pos : batch.positives) {
        preds[k] = model::predict_pair(out.snapshot, dataset, pos.user, pos.item);
        labels[k++] = 1.0;
      }
      for (const auto& [user, item] : batch.negatives) {
        preds[k] = model::predict_pair(out.snapshot, dataset, user, item);
        labels[k++] = 0.0;
      }
    }

    // The schedule advances after the update, so iteration `iter` (1-based)
    // applies the drop rate of `iter - 1`; the very first batch drops nothing.
    const auto weights = denoise::batch_weights(config.strategy, preds, labels, iter - 1,
                                                config.schedule, config.reweight);

    double batch_loss = 0;
    for (std::size_t k = 0; k < weights.size(); ++k)
      batch_loss += weights[k] * denoise::ce_loss(preds[k], labels[k]);
    batch_loss /= static_cast<double>(batch.size());
    if (!std::isfinite(batch_loss))
      throw std::runtime_error("non-finite loss at iteration " + std::to_string(iter));

    // Mean-style scaling: constant per batch so every strategy optimises a
    // comparable objective.
    std::vector<double> scaled = weights;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& w : scaled) w *= inv;

    try {
      const auto grads = model::backprop_batch(out.snapshot, dataset, batch, scaled, rng);
      model::adam_step(adam, out.snapshot, grads);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(iter) + ": " + e.what());
    }

    if (config.strategy == denoise::LossStrategy::kTruncatedCe) {
      DropLogEntry entry;
      entry.iteration = iter;
      entry.epoch = completed_epochs + 1;
      entry.n_pos = static_cast<std::int32_t>(batch.positives.size());
      entry.epsilon = denoise::drop_rate(iter - 1, config.schedule);
      for (std::size_t k = 0; k < batch.positives.size(); ++k) {
        const auto& r = batch.positives[k];
        const bool is_fp = r.noise_flag && *r.noise_flag == 0;
        if (is_fp) ++entry.n_fp_pos;
        if (weights[k] == 0.0) {
          ++entry.n_dropped;
          if (is_fp) ++entry.n_dropped_fp;
        }
      }
      out.drop_log.entries.push_back(entry);
    }

    cursor += take;
    out.iterations_run = iter;
    if (cursor >= pool.size()) {
      cursor = 0;
      ++completed_epochs;
      out.loss_log.rows.push_back(
          record_loss_groups(out.snapshot, dataset, probe, completed_epochs));

      if (config.eval_every_epochs > 0 && completed_epochs % config.eval_every_epochs == 0) {
        const double recall = validation_recall(out.snapshot, dataset, config.eval_k);
        if (recall > best_recall) {
          best_recall = recall;
          stale_evals = 0;
        } else if (++stale_evals > config.eval_patience) {
          break;
        }
      }
    }
  }

  if (cursor != 0)  // partial final epoch still gets a probe row
    out.loss_log.rows.push_back(
        record_loss_groups(out.snapshot, dataset, probe, completed_epochs + 1));
  return out;
}

}  // namespace

void LossCurveLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,tp_mean,fp_mean,pos_mean,neg_mean\n";
  for (const auto& r : rows)
    out << r.epoch << ',' << fmt(r.tp_mean) << ',' << fmt(r.fp_mean) << ','
        << fmt(r.pos_mean) << ',' << fmt(r.neg_mean) << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

void DropLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,epoch,n_pos,n_fp_pos,n_dropped,n_dropped_fp,epsilon\n";
  for (const auto& e : entries)
    out << e.iteration << ',' << e.epoch << ',' << e.n_pos << ',' << e.n_fp_pos << ','
        << e.n_dropped << ',' << e.n_dropped_fp << ',' << fmt(e.epsilon) << '\n';
  if (!out) throw std::runtime_error("short write: " + path);
}

LossProbe make_loss_probe(const data::Dataset& dataset, std::uint64_t seed, int cap) {
  auto rng = make_rng(seed, RngStream::kLossProbe);
  const auto capped = [&rng, cap](std::vector<data::InteractionRecord> recs) {
    if (recs.size() <= static_cast<std::size_t>(cap)) return recs;
    std::shuffle(recs.begin(), recs.end(), rng);
    recs.resize(static_cast<std::size_t>(cap));
    return recs;
  };

  LossProbe probe;
  std::vector<data::InteractionRecord> tp, fp;
  for (const auto& r : dataset.train) {
    if (r.noise_flag && *r.noise_flag == 1) tp.push_back(r);
    if (r.noise_flag && *r.noise_flag == 0) fp.push_back(r);
  }
  probe.tp = capped(std::move(tp));
  probe.fp = capped(std::move(fp));
  probe.pos = capped(dataset.train);

  // Random non-interacted pairs; duplicates are fine for a loss probe.
  std::vector<std::int32_t> open_users;
  for (std::int32_t u = 0; u < dataset.n_users; ++u)
    if (static_cast<std::int32_t>(dataset.user_pos[static_cast<std::size_t>(u)].size()) <
        dataset.n_items)
      open_users.push_back(u);
  if (!open_users.empty()) {
    std::uniform_int_distribution<std::size_t> pick_user(0, open_users.size() - 1);
    std::uniform_int_distribution<std::int32_t> pick_item(0, dataset.n_items - 1);
    const auto want = std::min<std::size_t>(static_cast<std::size_t>(cap),
                                            dataset.train.size());
    while (probe.neg.size() < want) {
      const std::int32_t u = open_users[pick_user(rng)];
      std::int32_t i = pick_item(rng);
      while (dataset.user_has_item(u, i)) i = pick_item(rng);
      probe.neg.emplace_back(u, i);
    }
  }
  return probe;
}

LossGroupRow record_loss_groups(const model::ModelSnapshot& snapshot,
                                const data::Dataset& dataset, const LossProbe& probe,
                                std::int64_t epoch) {
  LossGroupRow row;
  row.epoch = epoch;
  row.tp_mean = mean_raw_ce(snapshot, dataset, probe.tp, 1.0);
  row.fp_mean = mean_raw_ce(snapshot, dataset, probe.fp, 1.0);
  row.pos_mean = mean_raw_ce(snapshot, dataset, probe.pos, 1.0);
  if (probe.neg.empty()) {
    row.neg_mean = std::numeric_limits<double>::quiet_NaN();
  } else {
    double sum = 0;
    for (const auto& [u, i] : probe.neg)
      sum += denoise::ce_loss(model::predict_pair(snapshot, dataset, u, i), 0.0);
    row.neg_mean = sum / static_cast<double>(probe.neg.size());
  }
  return row;
}

TrainResult train(const data::Dataset& dataset, const TrainConfig& config) {
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  auto out = run_loop(dataset, config, PositiveSource::kAll, nullptr,
                      static_cast<std::uint64_t>(RngStream::kTrainLoop));
  return {std::move(out.snapshot), std::move(out.loss_log), std::move(out.drop_log),
          out.iterations_run};
}

TrainResult train_clean(const data::Dataset& dataset, const TrainConfig& config) {
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!dataset.has_noise_flags())
    throw std::invalid_argument("train_clean needs noise flags on every train record");
  TrainConfig ce = config;
  ce.strategy = denoise::LossStrategy::kCe;
  auto out = run_loop(dataset, ce, PositiveSource::kCleanOnly, nullptr,
                      static_cast<std::uint64_t>(RngStream::kTrainLoop));
  return {std::move(out.snapshot), std::move(out.loss_log), std::move(out.drop_log),
          out.iterations_run};
}

model::ModelSnapshot finetune(const model::ModelSnapshot& snapshot,
                              const data::Dataset& dataset, const TrainConfig& config) {
  if (config.max_iterations == 0) return snapshot;
  TrainConfig ce = config;
  ce.strategy = denoise::LossStrategy::kCe;
  return run_loop(dataset, ce, PositiveSource::kExtraOnly, &snapshot, kFinetuneLoopStream)
      .snapshot;
}

WarmupResult warmup_then_train(const data::Dataset& dataset,
                               const TrainConfig& warmup_config,
                               const TrainConfig& config) {
  // Initialise once from the main seed so a zero-length warm-up phase leaves
  // the denoising run bit-identical to train(dataset, config).
  model::ModelSnapshot warm =
      model::init_params(config.model, dataset.n_users, dataset.n_items, config.seed);
  if (warmup_config.max_iterations > 0) {
    TrainConfig ce = warmup_config;
    ce.strategy = denoise::LossStrategy::kCe;
    warm = run_loop(dataset, ce, PositiveSource::kExtraOnly, &warm, kWarmupLoopStream)
               .snapshot;
  }
  auto out = run_loop(dataset, config, PositiveSource::kAll, &warm,
                      static_cast<std::uint64_t>(RngStream::kTrainLoop));
  return {std::move(warm), {std::move(out.snapshot), std::move(out.loss_log),
                            std::move(out.drop_log), out.iterations_run}};
}

}  // namespace adt::train
