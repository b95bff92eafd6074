#pragma once

#include <cstdint>

#include "adt/model.hpp"

namespace adt::model {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Updates are dense: every block is touched each
/// step, so momenta keep decaying for parameters that received no gradient.
struct AdamState {
  AdamConfig config;
  ModelParams m;  // first-moment accumulator, shaped like the parameters
  ModelParams v;  // second-moment accumulator
  std::int64_t step = 0;

  static AdamState create(const ModelParams& like, const AdamConfig& config = {});
};

/// One optimiser step in place; also bumps snapshot.step. Throws on any shape
/// mismatch between gradients and parameters.
void adam_step(AdamState& state, ModelSnapshot& snapshot, const ModelParams& grads);

}  // namespace adt::model
