#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adt::denoise {

enum class LossStrategy {
  kCe,           // plain binary cross-entropy
  kTruncatedCe,  // drop the largest-loss positives per batch (T-CE)
  kReweightedCe, // down-weight hard examples smoothly (R-CE)
};

/// Iteration-indexed drop-rate curve: epsilon(T) = min(alpha * T, epsilon_max).
/// The cap bounds how many positives may ever be discarded; alpha controls how
/// fast the curve ramps up so the model sees easy (clean) examples first.
struct DropRateSchedule {
  double alpha = 0.0;
  double epsilon_max = 0.0;

  /// Schedule that reaches epsilon_max after epsilon_n iterations.
  static DropRateSchedule from_iterations(double epsilon_max, std::int64_t epsilon_n);
};

struct ReweightConfig {
  /// Exponent on the agreement between prediction and label; beta = 0 recovers
  /// plain CE, larger beta suppresses hard (likely-noisy) examples harder.
  double beta = 0.25;
};

/// Binary cross-entropy -[y log p + (1-y) log(1-p)] for a clamped probability.
double ce_loss(double y_hat, double y);

/// epsilon(T) for iteration T >= 0.
double drop_rate(std::int64_t iteration, const DropRateSchedule& schedule);

/// T-CE selection: returns the indices (into pos_losses, ascending) of the
/// k = min(floor(epsilon * total_batch_size), |pos_losses|) largest-loss
/// positives. Ties prefer the lower index. Negatives are never dropped, which
/// is why the count is taken over the whole batch but capped by the number of
/// positives actually present.
std::vector<std::size_t> select_truncated(const std::vector<double>& pos_losses,
                                          std::size_t total_batch_size, double epsilon);

/// R-CE weight: y_hat^beta for positives, (1 - y_hat)^beta for negatives.
double rce_weight(double y_hat, double y, double beta);

/// Per-example weights for one batch under the given strategy. `predictions`
/// and `labels` run over the whole batch (positives and negatives in any
/// order); labels must be 0 or 1. T-CE weights are 0/1, with the drop rate
/// taken from `schedule` at `iteration`; R-CE weights come from rce_weight;
/// plain CE returns all ones.
std::vector<double> batch_weights(LossStrategy strategy,
                                  const std::vector<double>& predictions,
                                  const std::vector<double>& labels,
                                  std::int64_t iteration,
                                  const DropRateSchedule& schedule,
                                  const ReweightConfig& reweight);

}  // namespace adt::denoise
