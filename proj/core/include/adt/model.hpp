#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "adt/dataset.hpp"

namespace adt::model {

enum class ModelKind { kGmf, kNeumf, kCdae };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::kGmf;
  /// Embedding size for GMF and for each NeuMF branch.
  int factors = 32;
  /// NeuMF hidden tower; the first width must equal 2 * factors because the
  /// tower consumes the concatenated user/item embeddings.
  std::vector<int> mlp_tower = {64, 32, 16};
  /// CDAE hidden width.
  int hidden = 200;
  /// CDAE mask-out corruption rate q in [0, 1); survivors are scaled 1/(1-q).
  double corruption = 0.5;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Generalised matrix factorisation: y = sigma(h' (p_u ⊙ q_i)).
struct GmfParams {
  Eigen::MatrixXd user_emb;  // n_users x factors
  Eigen::MatrixXd item_emb;  // n_items x factors
  Eigen::VectorXd output;    // factors
};

/// Neural MF: a GMF branch and an MLP branch (separate embeddings) fused by a
/// final linear layer over [gmf_vector; tower_output].
struct NeumfParams {
  Eigen::MatrixXd gmf_user, gmf_item;
  Eigen::MatrixXd mlp_user, mlp_item;
  std::vector<DenseLayer> tower;  // ReLU activations
  Eigen::VectorXd fusion;
};

/// Denoising autoencoder over a user's interaction row, with a per-user offset
/// added to the hidden layer. Training corrupts the input (mask-out); scoring
/// uses the clean row.
struct CdaeParams {
  Eigen::MatrixXd encoder;      // n_items x hidden
  Eigen::MatrixXd user_bias;    // n_users x hidden
  Eigen::VectorXd hidden_bias;  // hidden
  Eigen::MatrixXd decoder;      // hidden x n_items
  Eigen::VectorXd output_bias;  // n_items
};

using ModelParams = std::variant<GmfParams, NeumfParams, CdaeParams>;

/// A complete, self-describing model state. Snapshots are value types: train
/// steps copy in, mutate, and hand back a new snapshot, so a published
/// snapshot never changes underneath its consumers.
struct ModelSnapshot {
  ModelKind kind = ModelKind::kGmf;
  ModelConfig config;
  std::int32_t n_users = 0;
  std::int32_t n_items = 0;
  std::uint64_t seed = 0;  // seed used for initialisation
  std::int64_t step = 0;   // optimiser steps applied so far
  ModelParams params;
};

/// Contiguous view of one parameter block (Eigen stores both matrices and
/// vectors as flat double arrays).
struct BlockView {
  const char* name;
  double* data;
  std::ptrdiff_t size;
};
struct ConstBlockView {
  const char* name;
  const double* data;
  std::ptrdiff_t size;
};

std::vector<BlockView> param_blocks(ModelParams& params);
std::vector<ConstBlockView> param_blocks(const ModelParams& params);

/// Same structure as `like`, all blocks zeroed (gradient / moment buffers).
ModelParams zeros_like(const ModelParams& like);
std::int64_t param_count(const ModelParams& params);
Eigen::VectorXd flatten(const ModelParams& params);
void unflatten(const Eigen::VectorXd& flat, ModelParams& params);
double max_abs_diff(const ModelParams& a, const ModelParams& b);

/// Prediction clamp keeping log-loss finite; gradients vanish on the clamped
/// region (the clamp is treated as a constant there).
inline constexpr double kProbEps = 1e-8;
double clamp_probability(double p);

/// Deterministic initialisation: embedding tables ~ N(0, 0.01), dense layers
/// Glorot-uniform, biases zero. Same (config, dims, seed) -> identical state.
ModelSnapshot init_params(const ModelConfig& config, std::int32_t n_users,
                          std::int32_t n_items, std::uint64_t seed);

/// Clamped interaction probability for one pair (inference mode: CDAE sees the
/// clean input row).
double predict_pair(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                    std::int32_t user, std::int32_t item);

/// Clamped scores for every item for one user. Matches predict_pair exactly.
Eigen::VectorXd predict_all(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                            std::int32_t user);

/// Latent vector used for user-to-user similarity: the GMF user embedding, the
/// NeuMF GMF-branch embedding, or the CDAE clean hidden activation.
Eigen::VectorXd user_representation(const ModelSnapshot& snapshot,
                                    const data::Dataset& dataset, std::int32_t user);

/// Explicit CDAE corruption draw: per distinct batch user, a keep/drop flag for
/// each of the user's train items (aligned with dataset.user_pos order) plus
/// the survivor scale 1/(1-q).
struct CdaeCorruption {
  double scale = 1.0;
  std::vector<std::pair<std::int32_t, std::vector<std::uint8_t>>> users;
};

CdaeCorruption draw_cdae_corruption(const data::Dataset& dataset, const data::Batch& batch,
                                    double corruption, std::mt19937_64& rng);

/// Gradient of sum_k w_k * CE(y_hat_k, y_k) over the batch (positives first,
/// then negatives; `weights` runs over the same order). CDAE corruption noise
/// is drawn from `rng`; GMF and NeuMF never touch it. Throws if a gradient
/// block goes non-finite, naming the block.
ModelParams backprop_batch(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                           const data::Batch& batch, const std::vector<double>& weights,
                           std::mt19937_64& rng);

/// Same, with an explicit corruption draw (CDAE only; exposed for testing the
/// corrupted forward/backward path against an oracle).
ModelParams backprop_batch(const ModelSnapshot& snapshot, const data::Dataset& dataset,
                           const data::Batch& batch, const std::vector<double>& weights,
                           const CdaeCorruption& corruption);

namespace detail {
// Per-architecture backprop kernels (see model_gmf.cpp etc).
void accumulate_gmf(const GmfParams& p, const data::Dataset& dataset,
                    const data::Batch& batch, const std::vector<double>& weights,
                    GmfParams& grad);
void accumulate_neumf(const NeumfParams& p, const data::Dataset& dataset,
                      const data::Batch& batch, const std::vector<double>& weights,
                      NeumfParams& grad);
void accumulate_cdae(const CdaeParams& p, const data::Dataset& dataset,
                     const data::Batch& batch, const std::vector<double>& weights,
                     const CdaeCorruption& corruption, CdaeParams& grad);
double sigmoid(double z);
}  // namespace detail

}  // namespace adt::model
