#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "adt/dataset.hpp"
#include "adt/train.hpp"

namespace adt::eval {

/// Full item-score vector for one user.
using Scorer = std::function<Eigen::VectorXd(std::int32_t user)>;

/// Top-k item ids by score, descending, after removing `exclude` (sorted item
/// ids, typically the user's train positives). Score ties break toward the
/// lower item id. Throws if k exceeds the number of candidates left.
std::vector<std::int32_t> rank_items(const Eigen::VectorXd& scores,
                                     const std::vector<std::int32_t>& exclude, int k);

/// |top-k ∩ relevant| / |relevant|; `ranked` may be shorter than k.
double recall_at_k(const std::vector<std::int32_t>& ranked,
                   const std::unordered_set<std::int32_t>& relevant, int k);

/// Binary-gain NDCG: DCG = sum 1/log2(rank + 1) over hits, ideal DCG places
/// min(k, |relevant|) hits on top.
double ndcg_at_k(const std::vector<std::int32_t>& ranked,
                 const std::unordered_set<std::int32_t>& relevant, int k);

struct EvalOptions {
  std::vector<int> ks = {20, 50};
  /// Number of equal-interaction-mass user groups for the per-activity
  /// breakdown; < 2 disables the breakdown.
  int activity_groups = 0;
  /// Restrict evaluation to these users (still skipping those without clean
  /// test positives).
  std::optional<std::vector<std::int32_t>> user_subset;
};

struct MetricTable {
  std::map<int, double> recall;  // k -> mean over evaluated users
  std::map<int, double> ndcg;
  std::int32_t users_evaluated = 0;
  std::int32_t users_skipped = 0;
};

struct DenoiseDiagRow {
  std::int64_t epoch = 0;
  double recall = 0;     // cumulative: dropped false positives / false positives seen
  double precision = 0;  // cumulative: dropped false positives / dropped
  bool precision_defined = false;  // false when nothing was dropped yet
  double baseline_recall = 0;      // random dropping at the same rate
  double baseline_precision = 0;   // false-positive share of the stream
};

struct EvalReport {
  MetricTable overall;
  std::vector<MetricTable> by_activity;  // empty unless activity_groups >= 2
  std::vector<DenoiseDiagRow> denoise;   // filled by the caller when available
  std::string skip_policy = "users without clean test positives are skipped";
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Ranks every (subset) user with the scorer, excluding train positives, and
/// averages Recall/NDCG over users that have at least one test positive.
EvalReport evaluate(const Scorer& scorer, const data::Dataset& dataset,
                    const EvalOptions& options);

/// Epoch-level cumulative precision/recall of the truncation decisions against
/// the noise flags, with the matching random-baseline columns. Requires a
/// flag-carrying dataset and a drop log recorded on it.
std::vector<DenoiseDiagRow> denoise_precision_recall(const train::DropLog& drop_log,
                                                     const data::Dataset& dataset);

void write_denoise_csv(const std::vector<DenoiseDiagRow>& rows, const std::string& path);

/// Splits users into n_groups by train-interaction count: users are sorted by
/// activity (descending) and greedily packed so each group carries roughly the
/// same total interaction mass. Returns the group id (0 = most active) per
/// user; users with no train interactions land in the last group.
std::vector<int> group_users_by_activity(const data::Dataset& dataset, int n_groups);

}  // namespace adt::eval
