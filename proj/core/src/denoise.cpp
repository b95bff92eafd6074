#include "adt/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adt::denoise {

DropRateSchedule DropRateSchedule::from_iterations(double epsilon_max,
                                                   std::int64_t epsilon_n) {
  if (epsilon_max < 0 || epsilon_max >= 1)
    throw std::invalid_argument("epsilon_max must lie in [0, 1)");
  if (epsilon_n < 1) throw std::invalid_argument("epsilon_n must be >= 1");
  return {epsilon_max / static_cast<double>(epsilon_n), epsilon_max};
}

double ce_loss(double y_hat, double y) {
  if (y_hat <= 0 || y_hat >= 1)
    throw std::invalid_argument("ce_loss expects a clamped probability in (0, 1)");
  return -(y * std::log(y_hat) + (1.0 - y) * std::log(1.0 - y_hat));
}

double drop_rate(std::int64_t iteration, const DropRateSchedule& schedule) {
  if (iteration < 0) throw std::invalid_argument("iteration must be >= 0");
  return std::min(schedule.alpha * static_cast<double>(iteration), schedule.epsilon_max);
}

std::vector<std::size_t> select_truncated(const std::vector<double>& pos_losses,
                                          std::size_t total_batch_size, double epsilon) {
  if (total_batch_size < pos_losses.size())
    throw std::invalid_argument("total_batch_size smaller than the positive count");
  if (epsilon < 0 || epsilon >= 1)
    throw std::invalid_argument("epsilon must lie in [0, 1)");

  const auto k = std::min<std::size_t>(
      pos_losses.size(),
      static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(total_batch_size))));
  if (k == 0) return {};

  std::vector<std::size_t> order(pos_losses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return pos_losses[a] > pos_losses[b] ||
                             (pos_losses[a] == pos_losses[b] && a < b);
                    });
  std::vector<std::size_t> dropped(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(dropped.begin(), dropped.end());
  return dropped;
}

double rce_weight(double y_hat, double y, double beta) {
  if (beta < 0) throw std::invalid_argument("beta must be >= 0");
  const double agreement = y >= 0.5 ? y_hat : 1.0 - y_hat;
  return std::pow(agreement, beta);
}

std::vector<double> batch_weights(LossStrategy strategy,
                                  const std::vector<double>& predictions,
                                  const std::vector<double>& labels,
                                  std::int64_t iteration,
                                  const DropRateSchedule& schedule,
                                  const ReweightConfig& reweight) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("predictions and labels differ in length");

  std::vector<double> weights(predictions.size(), 1.0);
  switch (strategy) {
    case LossStrategy::kCe:
      break;
    case LossStrategy::kTruncatedCe: {
      std::vector<std::size_t> pos_index;  // batch positions of the positives
      std::vector<double> pos_losses;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] >= 0.5) {
          pos_index.push_back(k);
          pos_losses.push_back(ce_loss(predictions[k], 1.0));
        }
      }
      const double eps = drop_rate(iteration, schedule);
      for (std::size_t j : select_truncated(pos_losses, labels.size(), eps))
        weights[pos_index[j]] = 0.0;
      break;
    }
    case LossStrategy::kReweightedCe:
      for (std::size_t k = 0; k < labels.size(); ++k)
        weights[k] = rce_weight(predictions[k], labels[k], reweight.beta);
      break;
  }
  return weights;
}

}  // namespace adt::denoise
