#include "adt/colliding.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace adt::colliding {

double user_ratio(const data::Dataset& dataset, std::int32_t user) {
  std::int64_t total = 0, extra = 0;
  for (const auto& r : dataset.train) {
    if (r.user != user) continue;
    ++total;
    if (r.extra) ++extra;
  }
  if (total == 0)
    throw std::runtime_error("user " + std::to_string(user) + " has no train records");
  return static_cast<double>(extra) / static_cast<double>(total);
}

NeighborIndex build_neighbor_index(const model::ModelSnapshot& warm,
                                   const data::Dataset& dataset,
                                   const CollidingConfig& config) {
  if (config.n_neighbors < 1) throw std::invalid_argument("n_neighbors must be >= 1");
  if (config.n_neighbors >= dataset.n_users)
    throw std::invalid_argument("n_neighbors must be smaller than the user count");
  if (config.lambda < 0 || config.lambda > 1)
    throw std::invalid_argument("lambda must lie in [0, 1]");

  // Candidate pool: users the warm-up phase actually saw.
  std::vector<char> has_extra(static_cast<std::size_t>(dataset.n_users), 0);
  for (const auto& r : dataset.train)
    if (r.extra) has_extra[static_cast<std::size_t>(r.user)] = 1;
  std::vector<std::int32_t> candidates;
  for (std::int32_t u = 0; u < dataset.n_users; ++u)
    if (has_extra[static_cast<std::size_t>(u)]) candidates.push_back(u);

  Eigen::MatrixXd reps;
  if (!candidates.empty()) {
    const Eigen::VectorXd probe = model::user_representation(warm, dataset, 0);
    reps.resize(static_cast<Eigen::Index>(candidates.size()), probe.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      reps.row(static_cast<Eigen::Index>(c)) =
          model::user_representation(warm, dataset, candidates[c]).transpose();
  }

  NeighborIndex index;
  index.neighbors.resize(static_cast<std::size_t>(dataset.n_users));
  index.weights.resize(static_cast<std::size_t>(dataset.n_users));
  if (candidates.empty()) return index;

  for (std::int32_t u = 0; u < dataset.n_users; ++u) {
    const Eigen::VectorXd rep = model::user_representation(warm, dataset, u);
    const Eigen::VectorXd sims = reps * rep;

    std::vector<std::size_t> order;
    order.reserve(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (candidates[c] != u) order.push_back(c);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(config.n_neighbors),
                                            order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        const double sa = sims(static_cast<Eigen::Index>(a));
                        const double sb = sims(static_cast<Eigen::Index>(b));
                        return sa > sb || (sa == sb && candidates[a] < candidates[b]);
                      });

    auto& nb = index.neighbors[static_cast<std::size_t>(u)];
    auto& wt = index.weights[static_cast<std::size_t>(u)];
    for (std::size_t t = 0; t < take; ++t) nb.push_back(candidates[order[t]]);
    if (nb.empty()) continue;

    if (config.weighting == NeighborWeighting::kSimilarity) {
      double total = 0;
      for (std::size_t t = 0; t < take; ++t) {
        const double s = std::max(0.0, sims(static_cast<Eigen::Index>(order[t])));
        wt.push_back(s);
        total += s;
      }
      if (total > 0)
        for (auto& w : wt) w /= total;
      else  // all similarities non-positive: fall back to uniform
        std::fill(wt.begin(), wt.end(), 1.0 / static_cast<double>(take));
    } else {
      wt.assign(take, 1.0 / static_cast<double>(take));
    }
  }
  return index;
}

Eigen::VectorXd colliding_fuse(const Eigen::VectorXd& own,
                               const std::vector<Eigen::VectorXd>& neighbor_scores,
                               const std::vector<double>& weights, double lambda) {
  if (lambda < 0 || lambda > 1) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (neighbor_scores.size() != weights.size())
    throw std::invalid_argument("neighbor score and weight counts differ");
  if (lambda == 1.0 || neighbor_scores.empty()) return own;

  Eigen::VectorXd blended = Eigen::VectorXd::Zero(own.size());
  for (std::size_t j = 0; j < neighbor_scores.size(); ++j) {
    if (neighbor_scores[j].size() != own.size())
      throw std::invalid_argument("neighbor score length does not match own scores");
    blended += weights[j] * neighbor_scores[j];
  }
  return lambda * own + (1.0 - lambda) * blended;
}

Eigen::VectorXd infer_with_colliding(const model::ModelSnapshot& final_snapshot,
                                     const data::Dataset& dataset,
                                     const NeighborIndex& index,
                                     const CollidingConfig& config, std::int32_t user) {
  const Eigen::VectorXd own = model::predict_all(final_snapshot, dataset, user);
  if (config.lambda == 1.0) return own;
  if (user_ratio(dataset, user) >= config.ratio_threshold) return own;

  const auto& nb = index.neighbors[static_cast<std::size_t>(user)];
  if (nb.empty()) return own;
  std::vector<Eigen::VectorXd> scores;
  scores.reserve(nb.size());
  for (std::int32_t n : nb) scores.push_back(model::predict_all(final_snapshot, dataset, n));
  return colliding_fuse(own, scores, index.weights[static_cast<std::size_t>(user)],
                        config.lambda);
}

}  // namespace adt::colliding
