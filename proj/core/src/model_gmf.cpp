#include "adt/model.hpp"
#include "model_internal.hpp"

namespace adt::model::detail {

void accumulate_gmf(const GmfParams& p, const data::Dataset& dataset,
                    const data::Batch& batch, const std::vector<double>& weights,
                    GmfParams& grad) {
  (void)dataset;
  const auto example = [&](std::int32_t u, std::int32_t i, double y, double w) {
    if (w == 0) return;
    const auto pu = p.user_emb.row(u);
    const auto qi = p.item_emb.row(i);
    const Eigen::RowVectorXd pq = pu.cwiseProduct(qi);
    const double z = pq.dot(p.output);
    const double y_hat = sigmoid(z);
    if (clamped(y_hat)) return;
    const double delta = w * (y_hat - y);
    grad.output += delta * pq.transpose();
    grad.user_emb.row(u) += delta * p.output.transpose().cwiseProduct(qi);
    grad.item_emb.row(i) += delta * p.output.transpose().cwiseProduct(pu);
  };

  std::size_t k = 0;
  for (const auto& pos : batch.positives) example(pos.user, pos.item, 1.0, weights[k++]);
  for (const auto& [user, item] : batch.negatives) example(user, item, 0.0, weights[k++]);
}

}  // namespace adt::model::detail
