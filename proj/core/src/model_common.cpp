#include "adt/model.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "adt/rng.hpp"

namespace adt::model {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGmf: return "gmf";
    case ModelKind::kNeumf: return "neumf";
    case ModelKind::kCdae: return "cdae";
  }
  throw std::logic_error("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "gmf") return ModelKind::kGmf;
  if (name == "neumf") return ModelKind::kNeumf;
  if (name == "cdae") return ModelKind::kCdae;
  throw std::invalid_argument("unknown model kind: " + name);
}

namespace {

template <class View, class Params>
std::vector<View> collect_blocks(Params& p) {
  std::vector<View> out;
  const auto add = [&out](const char* name, auto& m) {
    out.push_back({name, m.data(), m.size()});
  };
  if (auto* g = std::get_if<GmfParams>(&p)) {
    add("user_emb", g->user_emb);
    add("item_emb", g->item_emb);
    add("output", g->output);
  } else if (auto* n = std::get_if<NeumfParams>(&p)) {
    add("gmf_user", n->gmf_user);
    add("gmf_item", n->gmf_item);
    add("mlp_user", n->mlp_user);
    add("mlp_item", n->mlp_item);
    for (auto& layer : n->tower) {
      add("tower_weight", layer.weight);
      add("tower_bias", layer.bias);
    }
    add("fusion", n->fusion);
  } else if (auto* c = std::get_if<CdaeParams>(&p)) {
    add("encoder", c->encoder);
    add("user_bias", c->user_bias);
    add("hidden_bias", c->hidden_bias);
    add("decoder", c->decoder);
    add("output_bias", c->output_bias);
  }
  return out;
}

}  // namespace

std::vector<BlockView> param_blocks(ModelParams& params) {
  return collect_blocks<BlockView>(params);
}

std::vector<ConstBlockView> param_blocks(const ModelParams& params) {
  return collect_blocks<ConstBlockView>(params);
}

ModelParams zeros_like(const ModelParams& like) {
  ModelParams out = like;
  for (auto& block : param_blocks(out))
    Eigen::Map<Eigen::ArrayXd>(block.data, block.size).setZero();
  return out;
}

std::int64_t param_count(const ModelParams& params) {
  std::int64_t n = 0;
  for (const auto& block : param_blocks(params)) n += block.size;
  return n;
}

Eigen::VectorXd flatten(const ModelParams& params) {
  Eigen::VectorXd flat(param_count(params));
  std::ptrdiff_t offset = 0;
  for (const auto& block : param_blocks(params)) {
    flat.segment(offset, block.size) =
        Eigen::Map<const Eigen::VectorXd>(block.data, block.size);
    offset += block.size;
  }
  return flat;
}

void unflatten(const Eigen::VectorXd& flat, ModelParams& params) {
  if (flat.size() != param_count(params))
    throw std::invalid_argument("flat vector length does not match parameter count");
  std::ptrdiff_t offset = 0;
  for (auto& block : param_blocks(params)) {
    Eigen::Map<Eigen::VectorXd>(block.data, block.size) = flat.segment(offset, block.size);
    offset += block.size;
  }
}

double max_abs_diff(const ModelParams& a, const ModelParams& b) {
  const auto ba = param_blocks(a);
  const auto bb = param_blocks(b);
  if (ba.size() != bb.size())
    throw std::invalid_argument("parameter structures differ");
  double worst = 0;
  for (std::size_t k = 0; k < ba.size(); ++k) {
    if (ba[k].size != bb[k].size)
      throw std::invalid_argument("parameter structures differ");
    const auto va = Eigen::Map<const Eigen::ArrayXd>(ba[k].data, ba[k].size);
    const auto vb = Eigen::Map<const Eigen::ArrayXd>(bb[k].data, bb[k].size);
    worst = std::max(worst, (va - vb).abs().maxCoeff());
  }
  return worst;
}

double clamp_probability(double p) {
  return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}

double detail::sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

void validate_config(const ModelConfig& config, std::int32_t n_users, std::int32_t n_items) {
  if (n_users < 1 || n_items < 1)
    throw std::invalid_argument("model needs at least one user and one item");
  switch (config.kind) {
    case ModelKind::kGmf:
      if (config.factors < 1) throw std::invalid_argument("factors must be >= 1");
      break;
    case ModelKind::kNeumf:
      if (config.factors < 1) throw std::invalid_argument("factors must be >= 1");
      if (config.mlp_tower.empty())
        throw std::invalid_argument("NeuMF tower must have at least one layer");
      if (config.mlp_tower.front() != 2 * config.factors)
        throw std::invalid_argument(
            "first tower width must be 2 * factors (it consumes the concatenated "
            "user/item embeddings)");
      for (int w : config.mlp_tower)
        if (w < 1) throw std::invalid_argument("tower widths must be >= 1");
      break;
    case ModelKind::kCdae:
      if (config.hidden < 1) throw std::invalid_argument("hidden width must be >= 1");
      if (config.corruption < 0 || config.corruption >= 1)
        throw std::invalid_argument("corruption rate must lie in [0, 1)");
      break;
  }
}

void fill_gaussian(Eigen::MatrixXd& m, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (std::ptrdiff_t k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
}

// Glorot / fan-balanced uniform init for dense layers.
void fill_glorot(double* data, std::ptrdiff_t size, int fan_in, int fan_out,
                 std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::ptrdiff_t k = 0; k < size; ++k) data[k] = dist(rng);
}

constexpr double kEmbeddingStd = 0.01;

}  // namespace

ModelSnapshot init_params(const ModelConfig& config, std::int32_t n_users,
                          std::int32_t n_items, std::uint64_t seed) {
  validate_config(config, n_users, n_items);
  auto rng = make_rng(seed, RngStream::kParamInit);

  ModelSnapshot snap;
  snap.kind = config.kind;
  snap.config = config;
  snap.n_users = n_users;
  snap.n_items = n_items;
  snap.seed = seed;
  snap.step = 0;

  switch (config.kind) {
    case ModelKind::kGmf: {
      GmfParams p;
      p.user_emb.resize(n_users, config.factors);
      p.item_emb.resize(n_items, config.factors);
      p.output.resize(config.factors);
      fill_gaussian(p.user_emb, rng, kEmbeddingStd);
      fill_gaussian(p.item_emb, rng, kEmbeddingStd);
      fill_glorot(p.output.data(), p.output.size(), config.factors, 1, rng);
      snap.params = std::move(p);
      break;
    }
    case ModelKind::kNeumf: {
      NeumfParams p;
      const int d = config.factors;
      p.gmf_user.resize(n_users, d);
      p.gmf_item.resize(n_items, d);
      p.mlp_user.resize(n_users, d);
      p.mlp_item.resize(n_items, d);
      fill_gaussian(p.gmf_user, rng, kEmbeddingStd);
      fill_gaussian(p.gmf_item, rng, kEmbeddingStd);
      fill_gaussian(p.mlp_user, rng, kEmbeddingStd);
      fill_gaussian(p.mlp_item, rng, kEmbeddingStd);
      int in = config.mlp_tower.front();
      for (std::size_t l = 1; l < config.mlp_tower.size(); ++l) {
        // Layer l maps tower[l-1] -> tower[l]; the first width is the input.
        const int out = config.mlp_tower[l];
        DenseLayer layer;
        layer.weight.resize(out, in);
        layer.bias = Eigen::VectorXd::Zero(out);
        fill_glorot(layer.weight.data(), layer.weight.size(), in, out, rng);
        p.tower.push_back(std::move(layer));
        in = out;
      }
      p.fusion.resize(d + in);
      fill_glorot(p.fusion.data(), p.fusion.size(), d + in, 1, rng);
      snap.params = std::move(p);
      break;
    }
    case ModelKind::kCdae: {
      CdaeParams p;
      const int h = config.hidden;
      p.encoder.resize(n_items, h);
      p.user_bias.resize(n_users, h);
      p.hidden_bias = Eigen::VectorXd::Zero(h);
      p.decoder.resize(h, n_items);
      p.output_bias = Eigen::VectorXd::Zero(n_items);
      fill_glorot(p.encoder.data(), p.encoder.size(), n_items, h, rng);
      fill_gaussian(p.user_bias, rng, kEmbeddingStd);
      fill_glorot(p.decoder.data(), p.decoder.size(), h, n_items, rng);
      snap.params = std::move(p);
      break;
    }
  }
  return snap;
}

CdaeCorruption draw_cdae_corruption(const data::Dataset& dataset, const data::Batch& batch,
                                    double corruption, std::mt19937_64& rng) {
  if (corruption < 0 || corruption >= 1)
    throw std::invalid_argument("corruption rate must lie in [0, 1)");
  CdaeCorruption corr;
  corr.scale = 1.0 / (1.0 - corruption);

  std::unordered_set<std::int32_t> seen;
  std::bernoulli_distribution drop(corruption);
  const auto visit = [&](std::int32_t user) {
    if (!seen.insert(user).second) return;
    const auto& items = dataset.user_pos[static_cast<std::size_t>(user)];
    std::vector<std::uint8_t> kept(items.size(), std::uint8_t{1});
    if (corruption > 0)
      for (auto& flag : kept) flag = drop(rng) ? std::uint8_t{0} : std::uint8_t{1};
    corr.users.emplace_back(user, std::move(kept));
  };
  for (const auto& pos : batch.positives) visit(pos.user);
  for (const auto& [user, item] : batch.negatives) visit(user);
  return corr;
}

namespace {

void check_finite(const ModelParams& grads) {
  for (const auto& block : param_blocks(grads)) {
    const auto v = Eigen::Map<const Eigen::ArrayXd>(block.data, block.size);
    if (!v.isFinite().all())
      throw std::runtime_error(std::string("non-finite gradient in parameter block '") +
                               block.name + "'");
  }
}

void check_weights(const data::Batch& batch, const std::vector<double>& weights) {
  if (weights.size() != batch.size())
    throw std::invalid_argument("weight vector length does not match batch size");
}

}  // namespace

ModelParams backprop_batch(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                           const data::Batch& batch, const std::vector<double>& weights,
                           const CdaeCorruption& corruption) {
  check_weights(batch, weights);
  const auto* p = std::get_if<CdaeParams>(&snapshot.params);
  if (!p) throw std::invalid_argument("explicit corruption only applies to CDAE");
  ModelParams grads = zeros_like(snapshot.params);
  detail::accumulate_cdae(*p, dataset, batch, weights, corruption,
                          std::get<CdaeParams>(grads));
  check_finite(grads);
  return grads;
}

ModelParams backprop_batch(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                           const data::Batch& batch, const std::vector<double>& weights,
                           std::mt19937_64& rng) {
  check_weights(batch, weights);
  ModelParams grads = zeros_like(snapshot.params);
  if (const auto* g = std::get_if<GmfParams>(&snapshot.params)) {
    detail::accumulate_gmf(*g, dataset, batch, weights, std::get<GmfParams>(grads));
  } else if (const auto* n = std::get_if<NeumfParams>(&snapshot.params)) {
    detail::accumulate_neumf(*n, dataset, batch, weights, std::get<NeumfParams>(grads));
  } else {
    const auto& c = std::get<CdaeParams>(snapshot.params);
    const auto corr = draw_cdae_corruption(dataset, batch, snapshot.config.corruption, rng);
    detail::accumulate_cdae(c, dataset, batch, weights, corr, std::get<CdaeParams>(grads));
  }
  check_finite(grads);
  return grads;
}

}  // namespace adt::model
