#include "adt/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adt::model {

AdamState AdamState::create(const ModelParams& like, const AdamConfig& config) {
  if (config.learning_rate < 0) throw std::invalid_argument("learning rate must be >= 0");
  if (config.beta1 < 0 || config.beta1 >= 1 || config.beta2 < 0 || config.beta2 >= 1)
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (config.epsilon <= 0) throw std::invalid_argument("Adam epsilon must be > 0");
  return {config, zeros_like(like), zeros_like(like), 0};
}

void adam_step(AdamState& state, ModelSnapshot& snapshot, const ModelParams& grads) {
  auto pb = param_blocks(snapshot.params);
  const auto gb = param_blocks(grads);
  auto mb = param_blocks(state.m);
  auto vb = param_blocks(state.v);
  if (gb.size() != pb.size() || mb.size() != pb.size())
    throw std::invalid_argument("gradient structure does not match the parameters");

  state.step += 1;
  snapshot.step += 1;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  for (std::size_t k = 0; k < pb.size(); ++k) {
    if (gb[k].size != pb[k].size)
      throw std::invalid_argument(std::string("gradient shape mismatch in block '") +
                                  pb[k].name + "'");
    Eigen::Map<Eigen::ArrayXd> p(pb[k].data, pb[k].size);
    Eigen::Map<const Eigen::ArrayXd> g(gb[k].data, gb[k].size);
    Eigen::Map<Eigen::ArrayXd> m(mb[k].data, mb[k].size);
    Eigen::Map<Eigen::ArrayXd> v(vb[k].data, vb[k].size);

    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.square();
    p -= c.learning_rate * (m / bc1) / ((v / bc2).sqrt() + c.epsilon);
  }
}

}  // namespace adt::model
