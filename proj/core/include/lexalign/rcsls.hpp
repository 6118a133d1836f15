#pragma once

#include "lexalign/baselines.hpp"
#include "lexalign/embeddings.hpp"
#include "lexalign/lexicon.hpp"
#include "lexalign/retrieval.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lexalign {

enum class LossVariant { Linear, LogSumExp };

const char* to_string(LossVariant v);
const char* to_string(ConstraintDomain c);

/// All training hyperparameters. train_rcsls consumes the first entry of each
/// grid; grid_search sweeps the full cross product.
struct TrainConfig {
  std::vector<double> learning_rates = {1.0, 10.0, 25.0, 50.0};
  std::vector<int> epochs_grid = {10, 20};
  int k = 10;
  ConstraintDomain constraint = ConstraintDomain::Unconstrained;
  bool extended_normalization = false;
  Eigen::Index pool_cap = 0;   // extended pool cap; 0 = full vocabulary
  Eigen::Index batch_size = 0; // 0 = full batch
  double l2_reg = 0.0;
  LossVariant loss_variant = LossVariant::Linear;
  std::uint64_t seed = 42;
  bool lr_halving = true;
  int threads = 0;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

/// The vector pools the neighbor terms are computed against. Without extended
/// normalization these are exactly the seed rows (pair order, duplicates
/// kept); with it, the leading pool_cap rows of each full vocabulary.
struct NeighborPools {
  Eigen::MatrixXd target_pool;
  Eigen::MatrixXd source_pool;

  Eigen::Index target_size() const { return target_pool.rows(); }
  Eigen::Index source_size() const { return source_pool.rows(); }
};

NeighborPools build_neighbor_pools(const EmbeddingMatrix& src,
                                   const EmbeddingMatrix& tgt,
                                   const BilingualLexicon& lex,
                                   bool extended, Eigen::Index pool_cap = 0);

struct TrainTrace {
  std::vector<double> objective_history;  // full objective after each epoch
  std::vector<double> lr_history;         // learning rate used in each epoch
  double initial_objective = 0.0;         // objective at the warm start
  double best_objective = 0.0;
  double wall_seconds = 0.0;
  int projections_clamped = 0;  // spectral projections that actually clamped
  Eigen::Index batch_size_used = 0;
};

/// Per-pair neighbor aggregates at W. For the linear variant these are the
/// raw sums of the k largest dot products (the active piece of the max over
/// size-k subsets); for LogSumExp, the stabilized log-sum-exp of those dots.
struct PenaltyTerms {
  std::vector<double> target_side;  // over N_Y(W x_i)
  std::vector<double> source_side;  // over N_X(y_i)
};

PenaltyTerms rcsls_penalty_terms(const Eigen::MatrixXd& w,
                                 const Eigen::MatrixXd& x_n, const Eigen::MatrixXd& y_n,
                                 const NeighborPools& pools, int k,
                                 LossVariant variant = LossVariant::Linear,
                                 const RetrievalOptions& opt = {});

/// The relaxed CSLS objective
///   f(W) = (1/n) sum_i [ -2 x_i^T W^T y_i
///                        + pen_Y(i)/k + pen_X(i)/k ]   (linear variant)
/// with the neighbor sets recomputed at W, plus l2_reg * ||W||_F^2.
/// For LogSumExp the scaled penalty terms are replaced by the log-sum-exp of
/// the same k neighbor dots.
double rcsls_objective(const Eigen::MatrixXd& w,
                       const Eigen::MatrixXd& x_n, const Eigen::MatrixXd& y_n,
                       const NeighborPools& pools, int k,
                       LossVariant variant = LossVariant::Linear,
                       double l2_reg = 0.0,
                       const RetrievalOptions& opt = {});

/// A subgradient of rcsls_objective at W: the gradient of the active linear
/// piece (softmax-weighted for LogSumExp), plus 2 * l2_reg * W.
Eigen::MatrixXd rcsls_subgradient(const Eigen::MatrixXd& w,
                                  const Eigen::MatrixXd& x_n, const Eigen::MatrixXd& y_n,
                                  const NeighborPools& pools, int k,
                                  LossVariant variant = LossVariant::Linear,
                                  double l2_reg = 0.0,
                                  const RetrievalOptions& opt = {});

/// Euclidean projection onto the unit ball of the spectral norm: SVD with
/// singular values thresholded to one. Sets *clamped when any value exceeded 1.
Eigen::MatrixXd project_spectral(const Eigen::MatrixXd& m, bool* clamped = nullptr);

/// Projected subgradient descent on the RCSLS objective, warm-started from
/// the Procrustes solution of the seed pairs. Uses the first entry of each
/// grid in `config`. Returns the iterate with the lowest recorded full
/// objective (the warm start included).
std::pair<MappingMatrix, TrainTrace> train_rcsls(const EmbeddingMatrix& src,
                                                 const EmbeddingMatrix& tgt,
                                                 const BilingualLexicon& lex,
                                                 const NeighborPools& pools,
                                                 const TrainConfig& config);

struct GridSearchResult {
  TrainConfig best_config;  // single-point grids
  MappingMatrix mapping;    // model trained on train_lex at the best point
  TrainTrace trace;
  double valid_accuracy = 0.0;
};

/// Trains one model per (lr, epochs) grid point on train_lex, scores CSLS
/// P@1 on valid_lex, and returns the best point. Ties prefer the lower
/// learning rate, then fewer epochs.
GridSearchResult grid_search(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                             const BilingualLexicon& train_lex,
                             const BilingualLexicon& valid_lex,
                             const TrainConfig& config);

}  // namespace lexalign
