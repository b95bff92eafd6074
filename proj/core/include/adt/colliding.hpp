#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "adt/dataset.hpp"
#include "adt/model.hpp"

namespace adt::colliding {

enum class NeighborWeighting { kUniform, kSimilarity };

struct CollidingConfig {
  /// Weight kept by the user's own scores; 1 - lambda is shared among the
  /// neighbours. lambda = 1 disables fusion exactly.
  double lambda = 0.8;
  int n_neighbors = 10;
  /// Fusion only applies to users whose extra-feedback ratio is below this
  /// (the users the warm-up phase barely touched).
  double ratio_threshold = 0.1;
  NeighborWeighting weighting = NeighborWeighting::kUniform;
};

/// Fraction of a user's train records marked as reliable extra feedback.
/// Throws if the user has no train records.
double user_ratio(const data::Dataset& dataset, std::int32_t user);

/// k-nearest-neighbour table over warm-up user representations, exact inner
/// product. Only users that own at least one extra-feedback record qualify as
/// neighbours (they are the ones the warm-up phase actually fitted); the user
/// itself never appears in its own list. Per-user weights sum to 1.
struct NeighborIndex {
  std::vector<std::vector<std::int32_t>> neighbors;
  std::vector<std::vector<double>> weights;
};

NeighborIndex build_neighbor_index(const model::ModelSnapshot& warm,
                                   const data::Dataset& dataset,
                                   const CollidingConfig& config);

/// fused = lambda * own + (1 - lambda) * sum_j w_j * neighbor_j.
/// lambda = 1 returns `own` bit-for-bit.
Eigen::VectorXd colliding_fuse(const Eigen::VectorXd& own,
                               const std::vector<Eigen::VectorXd>& neighbor_scores,
                               const std::vector<double>& weights, double lambda);

/// Scores from the final model, blended with the final-model scores of the
/// user's warm-up neighbours when the user's extra-feedback ratio is below the
/// threshold; other users get their plain scores.
Eigen::VectorXd infer_with_colliding(const model::ModelSnapshot& final_snapshot,
                                     const data::Dataset& dataset,
                                     const NeighborIndex& index,
                                     const CollidingConfig& config, std::int32_t user);

}  // namespace adt::colliding
