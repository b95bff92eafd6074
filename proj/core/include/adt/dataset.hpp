#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace adt::data {

/// One observed (implicit-positive) interaction. Negatives are never stored;
/// they are sampled on the fly during training and evaluation.
struct InteractionRecord {
  std::int32_t user = 0;
  std::int32_t item = 0;
  /// Ground-truth preference when known: 1 = true positive, 0 = false positive
  /// (the interaction happened but the user did not actually like the item).
  /// Diagnostics only — training objectives never read it.
  std::optional<std::uint8_t> noise_flag;
  /// Member of the small reliable-feedback set (implies a true positive).
  bool extra = false;
};

bool operator==(const InteractionRecord& a, const InteractionRecord& b);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// A user–item interaction corpus with holdout partitions.
/// Partitions are disjoint on (user, item); `user_pos` always mirrors `train`.
struct Dataset {
  std::int32_t n_users = 0;
  std::int32_t n_items = 0;
  std::vector<InteractionRecord> train;
  std::vector<InteractionRecord> validation;
  std::vector<InteractionRecord> test;
  /// Sorted train-item list per user; the implicit-positive set used for
  /// negative sampling and evaluation exclusion.
  std::vector<std::vector<std::int32_t>> user_pos;

  void rebuild_user_pos();
  bool user_has_item(std::int32_t user, std::int32_t item) const;
  /// True when every train record carries a noise flag.
  bool has_noise_flags() const;
  std::vector<InteractionRecord> all_records() const;
};

/// A training mini-batch: stored positives plus freshly sampled negatives.
struct Batch {
  std::vector<InteractionRecord> positives;
  /// (user, item) pairs absent from the user's implicit-positive set.
  std::vector<std::pair<std::int32_t, std::int32_t>> negatives;

  std::size_t size() const { return positives.size() + negatives.size(); }
};

/// Column layout for tab-separated interaction logs.
/// A column index of -1 means "not present".
struct ColumnSpec {
  int user_col = 0;
  int item_col = 1;
  /// Optional graded feedback (rating, dwell time...). When present, values
  /// below `fp_threshold` mark the record as a false positive (noise_flag = 0);
  /// values at or above it mark a true positive.
  int value_col = -1;
  double fp_threshold = 3.0;
};

/// Reads a TSV interaction log into an unsplit dataset (everything lands in
/// `train`). User and item ids are re-indexed densely in order of first
/// appearance. Duplicate (user, item) lines are collapsed; the last value wins.
/// Malformed lines raise std::runtime_error naming the line number.
Dataset load_interactions(const std::string& path, const ColumnSpec& spec = {});

/// Applies a sidecar flags file ("user item noise_flag extra" per line, original
/// ids) produced by save_dataset to a loaded dataset.
void apply_flags_file(Dataset& dataset, const std::string& path);

/// Writes all records as TSV (user, item) plus a sidecar flags file, so that a
/// dataset round-trips through load_interactions + apply_flags_file. Ids are
/// written in first-appearance numbering (the loader's own convention), which
/// is the identity for datasets produced by this library.
void save_dataset(const Dataset& dataset, const std::string& tsv_path,
                  const std::string& flags_path);

/// Per-user random holdout split. Users with fewer than 3 records keep
/// everything in train. Holdout counts are floor(n * ratio) per partition.
/// The test partition keeps only records with noise_flag = 1 (clean test);
/// train and validation keep everything. Same seed -> same split.
Dataset split_holdout(const Dataset& source, const SplitRatios& ratios,
                      std::uint64_t seed);

/// Uniform negative sampling with rejection against user_pos. Produces
/// `ratio` negatives per positive, in positive order. Throws if some user's
/// positive set covers the whole item catalogue.
Batch sample_negatives(std::vector<InteractionRecord> positives,
                       const Dataset& dataset, int ratio, std::mt19937_64& rng);

/// Builds a fully-labelled synthetic corpus: each user/item gets a latent
/// Gaussian vector and the top ceil(density * n_items) items by inner product
/// become that user's positives (noise_flag = 1 everywhere). The result is
/// unsplit; follow with split_holdout / inject_false_positives.
Dataset synthesize_dataset(std::int32_t n_users, std::int32_t n_items,
                           int latent_dim, double density, std::uint64_t seed);

/// Adds ceil(rate * |train| / (1 - rate)) false-positive train records
/// (noise_flag = 0) on uniformly sampled non-interacted pairs, so the corrupted
/// train partition has roughly `rate` fraction of noise. Validation and test
/// are untouched. rate = 0 returns the input unchanged.
Dataset inject_false_positives(const Dataset& dataset, double rate,
                               std::uint64_t seed);

/// Marks `fraction` of the true-positive train records (sampled without
/// replacement) as reliable extra feedback.
Dataset reveal_extra_feedback(const Dataset& dataset, double fraction,
                              std::uint64_t seed);

}  // namespace adt::data
