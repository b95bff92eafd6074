#include "adt/model.hpp"
#include "model_internal.hpp"

namespace adt::model::detail {

void accumulate_neumf(const NeumfParams& p, const data::Dataset& dataset,
                      const data::Batch& batch, const std::vector<double>& weights,
                      NeumfParams& grad) {
  (void)dataset;
  const auto d = p.gmf_user.cols();
  const auto dm = p.mlp_user.cols();
  const auto n_layers = p.tower.size();

  std::vector<Eigen::VectorXd> pre(n_layers), act(n_layers);
  const auto example = [&](std::int32_t u, std::int32_t i, double y, double w) {
    if (w == 0) return;

    const Eigen::VectorXd gmf =
        p.gmf_user.row(u).cwiseProduct(p.gmf_item.row(i)).transpose();
    Eigen::VectorXd x(2 * dm);
    x << p.mlp_user.row(u).transpose(), p.mlp_item.row(i).transpose();

    const Eigen::VectorXd* input = &x;
    for (std::size_t l = 0; l < n_layers; ++l) {
      pre[l] = p.tower[l].weight * (*input) + p.tower[l].bias;
      act[l] = pre[l].cwiseMax(0.0);
      input = &act[l];
    }

    Eigen::VectorXd phi(d + input->size());
    phi << gmf, *input;
    const double z = p.fusion.dot(phi);
    const double y_hat = sigmoid(z);
    if (clamped(y_hat)) return;
    const double delta = w * (y_hat - y);

    grad.fusion += delta * phi;
    const Eigen::VectorXd dgmf = delta * p.fusion.head(d);
    grad.gmf_user.row(u) += dgmf.transpose().cwiseProduct(p.gmf_item.row(i));
    grad.gmf_item.row(i) += dgmf.transpose().cwiseProduct(p.gmf_user.row(u));

    Eigen::VectorXd dx = delta * p.fusion.tail(input->size());
    for (std::size_t l = n_layers; l-- > 0;) {
      const Eigen::VectorXd dpre =
          dx.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
      const Eigen::VectorXd& below = l == 0 ? x : act[l - 1];
      grad.tower[l].weight += dpre * below.transpose();
      grad.tower[l].bias += dpre;
      dx = p.tower[l].weight.transpose() * dpre;
    }
    grad.mlp_user.row(u) += dx.head(dm).transpose();
    grad.mlp_item.row(i) += dx.tail(dm).transpose();
  };

  std::size_t k = 0;
  for (const auto& pos : batch.positives) example(pos.user, pos.item, 1.0, weights[k++]);
  for (const auto& [user, item] : batch.negatives) example(user, item, 0.0, weights[k++]);
}

}  // namespace adt::model::detail
