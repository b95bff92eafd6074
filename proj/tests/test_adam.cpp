#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "adt/adam.hpp"
#include "adt/model.hpp"

using namespace adt;
using model::AdamConfig;
using model::AdamState;
using model::ModelConfig;
using model::ModelKind;

namespace {

model::ModelSnapshot small_snapshot(std::uint64_t seed = 1) {
  ModelConfig cfg;
  cfg.kind = ModelKind::kGmf;
  cfg.factors = 3;
  return model::init_params(cfg, 4, 5, seed);
}

}  // namespace

TEST_CASE("a zero gradient on fresh state leaves parameters untouched") {
  auto snap = small_snapshot();
  const auto before = snap.params;
  auto state = AdamState::create(snap.params);
  const auto zero = model::zeros_like(snap.params);
  model::adam_step(state, snap, zero);
  CHECK(model::max_abs_diff(before, snap.params) == 0.0);
  CHECK(snap.step == 1);
  CHECK(state.step == 1);
}

TEST_CASE("first step moves each coordinate by about the learning rate") {
  auto snap = small_snapshot();
  const Eigen::VectorXd before = model::flatten(snap.params);
  auto state = AdamState::create(snap.params);

  auto grads = model::zeros_like(snap.params);
  Eigen::VectorXd g(model::param_count(snap.params));
  for (Eigen::Index c = 0; c < g.size(); ++c) g(c) = (c % 2 == 0) ? 0.7 : -1.3;
  model::unflatten(g, grads);
  model::adam_step(state, snap, grads);

  const Eigen::VectorXd after = model::flatten(snap.params);
  for (Eigen::Index c = 0; c < g.size(); ++c) {
    // With bias correction the first update is lr * g / (|g| + eps).
    const double want = -0.001 * g(c) / (std::abs(g(c)) + 1e-8);
    CHECK(after(c) - before(c) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("three steps reproduce a hand-computed scalar trace") {
  // One parameter, lr = 0.1, gradients 1, 1, 0.5.
  auto snap = small_snapshot();
  snap.params = model::zeros_like(snap.params);

  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  auto state = AdamState::create(snap.params, cfg);

  const std::vector<double> gs{1.0, 1.0, 0.5};
  // Reference computed with plain scalar arithmetic.
  double m = 0.0, v = 0.0, x = 0.0;
  for (std::size_t t = 0; t < gs.size(); ++t) {
    m = 0.9 * m + 0.1 * gs[t];
    v = 0.999 * v + 0.001 * gs[t] * gs[t];
    const double mhat = m / (1.0 - std::pow(0.9, static_cast<double>(t + 1)));
    const double vhat = v / (1.0 - std::pow(0.999, static_cast<double>(t + 1)));
    x -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  }

  auto grads = model::zeros_like(snap.params);
  for (double gval : gs) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(model::param_count(snap.params));
    g(0) = gval;
    model::unflatten(g, grads);
    model::adam_step(state, snap, grads);
  }
  const Eigen::VectorXd after = model::flatten(snap.params);
  CHECK(after(0) == doctest::Approx(x).epsilon(1e-12));
  // Dense update: momenta decay but a never-touched coordinate with zero
  // moments stays put.
  CHECK(after(1) == 0.0);
  CHECK(snap.step == 3);
}

TEST_CASE("gradient shape mismatches are rejected") {
  auto snap = small_snapshot();
  auto state = AdamState::create(snap.params);

  ModelConfig other;
  other.kind = ModelKind::kGmf;
  other.factors = 4;  // different layout
  const auto wrong = model::init_params(other, 4, 5, 1);
  CHECK_THROWS(model::adam_step(state, snap, wrong.params));
}

TEST_CASE("two optimisers fed the same gradients stay bit-identical") {
  auto snap_a = small_snapshot(9);
  auto snap_b = snap_a;
  auto state_a = AdamState::create(snap_a.params);
  auto state_b = AdamState::create(snap_b.params);
  auto grads = model::zeros_like(snap_a.params);
  Eigen::VectorXd g(model::param_count(snap_a.params));
  for (int t = 0; t < 5; ++t) {
    for (Eigen::Index c = 0; c < g.size(); ++c)
      g(c) = std::sin(static_cast<double>(c + 3 * t));
    model::unflatten(g, grads);
    model::adam_step(state_a, snap_a, grads);
    model::adam_step(state_b, snap_b, grads);
  }
  CHECK(model::max_abs_diff(snap_a.params, snap_b.params) == 0.0);
}
