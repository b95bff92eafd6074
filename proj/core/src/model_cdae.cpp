#include <stdexcept>
#include <unordered_map>

#include "adt/model.hpp"
#include "model_internal.hpp"

namespace adt::model::detail {

void accumulate_cdae(const CdaeParams& p, const data::Dataset& dataset,
                     const data::Batch& batch, const std::vector<double>& weights,
                     const CdaeCorruption& corruption, CdaeParams& grad) {
  // Group the batch's (item, label, weight) triples per user; the autoencoder
  // forward pass is shared by every example of the same user.
  struct Example {
    std::int32_t item;
    double label;
    double weight;
  };
  std::unordered_map<std::int32_t, std::vector<Example>> by_user;
  {
    std::size_t k = 0;
    for (const auto& pos : batch.positives)
      by_user[pos.user].push_back({pos.item, 1.0, weights[k++]});
    for (const auto& [user, item] : batch.negatives)
      by_user[user].push_back({item, 0.0, weights[k++]});
  }

  const auto h_dim = p.hidden_bias.size();
  std::size_t covered = 0;
  for (const auto& [user, kept] : corruption.users) {
    const auto it = by_user.find(user);
    if (it == by_user.end()) continue;
    ++covered;
    const auto& items = dataset.user_pos[static_cast<std::size_t>(user)];
    if (kept.size() != items.size())
      throw std::invalid_argument("corruption mask does not match the user's item count");

    Eigen::VectorXd hidden_pre = p.hidden_bias + p.user_bias.row(user).transpose();
    for (std::size_t j = 0; j < items.size(); ++j)
      if (kept[j]) hidden_pre += corruption.scale * p.encoder.row(items[j]).transpose();
    const Eigen::VectorXd hidden = hidden_pre.cwiseMax(0.0);

    Eigen::VectorXd dhidden = Eigen::VectorXd::Zero(h_dim);
    bool touched = false;
    for (const auto& ex : it->second) {
      if (ex.weight == 0) continue;
      const double z = p.decoder.col(ex.item).dot(hidden) + p.output_bias(ex.item);
      const double y_hat = sigmoid(z);
      if (clamped(y_hat)) continue;
      const double delta = ex.weight * (y_hat - ex.label);
      grad.decoder.col(ex.item) += delta * hidden;
      grad.output_bias(ex.item) += delta;
      dhidden += delta * p.decoder.col(ex.item);
      touched = true;
    }
    if (!touched) continue;

    const Eigen::VectorXd dpre =
        dhidden.cwiseProduct((hidden_pre.array() > 0.0).cast<double>().matrix());
    grad.user_bias.row(user) += dpre.transpose();
    grad.hidden_bias += dpre;
    for (std::size_t j = 0; j < items.size(); ++j)
      if (kept[j]) grad.encoder.row(items[j]) += corruption.scale * dpre.transpose();
  }
  if (covered != by_user.size())
    throw std::invalid_argument("corruption draw does not cover every batch user");
}

}  // namespace adt::model::detail
