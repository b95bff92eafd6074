#include <stdexcept>

#include "adt/model.hpp"

namespace adt::model {
namespace {

using detail::sigmoid;

Eigen::VectorXd neumf_mlp_output(const NeumfParams& p, std::int32_t user,
                                 std::int32_t item) {
  const auto dm = p.mlp_user.cols();
  Eigen::VectorXd x(2 * dm);
  x << p.mlp_user.row(user).transpose(), p.mlp_item.row(item).transpose();
  for (const auto& layer : p.tower) x = (layer.weight * x + layer.bias).cwiseMax(0.0);
  return x;
}

double neumf_logit(const NeumfParams& p, std::int32_t user, std::int32_t item) {
  const auto d = p.gmf_user.cols();
  const Eigen::VectorXd gmf =
      p.gmf_user.row(user).cwiseProduct(p.gmf_item.row(item)).transpose();
  const Eigen::VectorXd mlp = neumf_mlp_output(p, user, item);
  return p.fusion.head(d).dot(gmf) + p.fusion.tail(mlp.size()).dot(mlp);
}

// Clean (uncorrupted, unscaled) hidden activation for one user.
Eigen::VectorXd cdae_hidden(const CdaeParams& p, const data::Dataset& dataset,
                            std::int32_t user) {
  Eigen::VectorXd pre = p.hidden_bias + p.user_bias.row(user).transpose();
  for (std::int32_t item : dataset.user_pos[static_cast<std::size_t>(user)])
    pre += p.encoder.row(item).transpose();
  return pre.cwiseMax(0.0);
}

void check_pair(const ModelSnapshot& snap, std::int32_t user, std::int32_t item) {
  if (user < 0 || user >= snap.n_users)
    throw std::out_of_range("user id out of range: " + std::to_string(user));
  if (item < 0 || item >= snap.n_items)
    throw std::out_of_range("item id out of range: " + std::to_string(item));
}

}  // namespace

double predict_pair(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                    std::int32_t user, std::int32_t item) {
  check_pair(snapshot, user, item);
  double z = 0;
  if (const auto* g = std::get_if<GmfParams>(&snapshot.params)) {
    z = g->user_emb.row(user).cwiseProduct(g->item_emb.row(item)).dot(g->output.transpose());
  } else if (const auto* n = std::get_if<NeumfParams>(&snapshot.params)) {
    z = neumf_logit(*n, user, item);
  } else {
    const auto& c = std::get<CdaeParams>(snapshot.params);
    z = c.decoder.col(item).dot(cdae_hidden(c, dataset, user)) + c.output_bias(item);
  }
  return clamp_probability(sigmoid(z));
}

Eigen::VectorXd predict_all(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                            std::int32_t user) {
  check_pair(snapshot, user, 0);
  Eigen::VectorXd z(snapshot.n_items);
  if (const auto* g = std::get_if<GmfParams>(&snapshot.params)) {
    z = g->item_emb * g->output.cwiseProduct(g->user_emb.row(user).transpose());
  } else if (const auto* n = std::get_if<NeumfParams>(&snapshot.params)) {
    for (std::int32_t i = 0; i < snapshot.n_items; ++i) z(i) = neumf_logit(*n, user, i);
  } else {
    const auto& c = std::get<CdaeParams>(snapshot.params);
    z = c.decoder.transpose() * cdae_hidden(c, dataset, user) + c.output_bias;
  }
  for (std::int32_t i = 0; i < snapshot.n_items; ++i)
    z(i) = clamp_probability(sigmoid(z(i)));
  return z;
}

Eigen::VectorXd user_representation(const ModelSnapshot& snapshot,
                                    const data::Dataset& dataset, std::int32_t user) {
  check_pair(snapshot, user, 0);
  if (const auto* g = std::get_if<GmfParams>(&snapshot.params))
    return g->user_emb.row(user).transpose();
  if (const auto* n = std::get_if<NeumfParams>(&snapshot.params))
    return n->gmf_user.row(user).transpose();
  return cdae_hidden(std::get<CdaeParams>(snapshot.params), dataset, user);
}

}  // namespace adt::model
