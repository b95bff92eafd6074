// Microbenchmarks for the training hot path: scoring, backprop, the
// optimiser step, truncation selection, negative sampling and the
// neighbour-index build. Sizes default to the synthetic-preset scale so the
// numbers map directly onto observed epoch times.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "adt/adam.hpp"
#include "adt/colliding.hpp"
#include "adt/dataset.hpp"
#include "adt/denoise.hpp"
#include "adt/eval.hpp"
#include "adt/model.hpp"

namespace {

using namespace adt;

// One shared corpus per scale; synthesizing inside the timing loop would
// drown out the kernels under test.
const data::Dataset& corpus() {
  static const data::Dataset ds = [] {
    auto full = data::synthesize_dataset(2000, 1000, 8, 0.02, 7);
    full = data::split_holdout(full, {}, 7);
    full = data::inject_false_positives(full, 0.3, 7);
    return data::reveal_extra_feedback(full, 0.1, 7);
  }();
  return ds;
}

model::ModelConfig model_config(model::ModelKind kind) {
  model::ModelConfig cfg;
  cfg.kind = kind;
  cfg.factors = 32;
  cfg.hidden = 200;
  return cfg;
}

model::ModelKind kind_of(std::int64_t arg) {
  switch (arg) {
    case 0: return model::ModelKind::kGmf;
    case 1: return model::ModelKind::kNeumf;
    default: return model::ModelKind::kCdae;
  }
}

data::Batch make_batch(const data::Dataset& ds, int batch_size, int neg_ratio,
                       std::mt19937_64& rng) {
  std::vector<data::InteractionRecord> pos;
  std::uniform_int_distribution<std::size_t> pick(0, ds.train.size() - 1);
  for (int k = 0; k < batch_size; ++k) pos.push_back(ds.train[pick(rng)]);
  return data::sample_negatives(std::move(pos), ds, neg_ratio, rng);
}

void BM_PredictAll(benchmark::State& state) {
  const auto& ds = corpus();
  const auto kind = kind_of(state.range(0));
  const auto snap = model::init_params(model_config(kind), ds.n_users, ds.n_items, 1);
  std::int32_t user = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::predict_all(snap, ds, user));
    user = (user + 1) % ds.n_users;
  }
  state.SetLabel(model::to_string(kind));
  state.SetItemsProcessed(state.iterations() * ds.n_items);
}
BENCHMARK(BM_PredictAll)->Arg(0)->Arg(1)->Arg(2);

void BM_BackpropBatch(benchmark::State& state) {
  const auto& ds = corpus();
  const auto kind = kind_of(state.range(0));
  const auto snap = model::init_params(model_config(kind), ds.n_users, ds.n_items, 1);
  std::mt19937_64 rng(1);
  const auto batch = make_batch(ds, 1024, 1, rng);
  const std::vector<double> weights(batch.size(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::backprop_batch(snap, ds, batch, weights, rng));
  }
  state.SetLabel(model::to_string(kind));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_BackpropBatch)->Arg(0)->Arg(1)->Arg(2);

void BM_AdamStep(benchmark::State& state) {
  const auto& ds = corpus();
  const auto kind = kind_of(state.range(0));
  auto snap = model::init_params(model_config(kind), ds.n_users, ds.n_items, 1);
  auto opt = model::AdamState::create(snap.params);
  const auto grads = model::zeros_like(snap.params);
  for (auto _ : state) {
    model::adam_step(opt, snap, grads);
    benchmark::DoNotOptimize(snap.step);
  }
  state.SetLabel(model::to_string(kind));
  state.SetItemsProcessed(state.iterations() * model::param_count(snap.params));
}
BENCHMARK(BM_AdamStep)->Arg(0)->Arg(1)->Arg(2);

void BM_SelectTruncated(benchmark::State& state) {
  const auto n_pos = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  std::vector<double> losses(n_pos);
  for (auto& l : losses) l = unif(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(denoise::select_truncated(losses, 2 * n_pos, 0.2));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_pos));
}
BENCHMARK(BM_SelectTruncated)->Arg(1024)->Arg(8192);

void BM_SampleNegatives(benchmark::State& state) {
  const auto& ds = corpus();
  std::mt19937_64 rng(5);
  std::vector<data::InteractionRecord> pos;
  std::uniform_int_distribution<std::size_t> pick(0, ds.train.size() - 1);
  for (int k = 0; k < 1024; ++k) pos.push_back(ds.train[pick(rng)]);
  const int ratio = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto copy = pos;
    benchmark::DoNotOptimize(data::sample_negatives(std::move(copy), ds, ratio, rng));
  }
  state.SetItemsProcessed(state.iterations() * 1024 * ratio);
}
BENCHMARK(BM_SampleNegatives)->Arg(1)->Arg(4);

void BM_RankItems(benchmark::State& state) {
  const auto& ds = corpus();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd scores(ds.n_items);
  for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) = gauss(rng);
  const std::vector<std::int32_t> exclude = ds.user_pos.front();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::rank_items(scores, exclude, k));
  }
  state.SetItemsProcessed(state.iterations() * ds.n_items);
}
BENCHMARK(BM_RankItems)->Arg(20)->Arg(100);

void BM_BuildNeighborIndex(benchmark::State& state) {
  const auto& ds = corpus();
  const auto snap = model::init_params(model_config(model::ModelKind::kGmf), ds.n_users,
                                       ds.n_items, 1);
  colliding::CollidingConfig cfg;
  cfg.n_neighbors = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(colliding::build_neighbor_index(snap, ds, cfg));
  }
  state.SetItemsProcessed(state.iterations() * ds.n_users);
}
BENCHMARK(BM_BuildNeighborIndex)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
