#pragma once

#include "lexalign/baselines.hpp"
#include "lexalign/embeddings.hpp"

#include <unordered_set>
#include <vector>

namespace lexalign {

/// Knobs for the batched scoring kernels. None of them may change results:
/// block size and worker count only affect scheduling, and fp32_scores trades
/// precision for throughput as an explicit opt-in.
struct RetrievalOptions {
  Eigen::Index block = 1024;  // candidate block size
  int threads = 0;            // 0 = hardware concurrency
  bool fp32_scores = false;   // run the dot-product kernel in 32-bit
};

struct ScoredIndex {
  Eigen::Index index;
  double score;
};

enum class Criterion { Nn, Csls };

const char* to_string(Criterion c);

/// Per-query predictions. query_indices defaults to 0..m-1 row positions;
/// harnesses overwrite it with source vocabulary indices.
struct TranslationResult {
  Criterion criterion = Criterion::Nn;
  std::vector<Eigen::Index> predicted;
  std::vector<double> scores;
  std::vector<Eigen::Index> query_indices;
};

/// Mean cosine of each cached point to its k nearest neighbors in the
/// opposite space.
struct NeighborCache {
  std::vector<double> r_values;
  int k = 0;
  Eigen::Index pool_size = 0;
};

/// Exact top-k by dot product for every query row against every candidate row
/// not in `exclude`. Descending by dot, ties broken by lower candidate index.
/// Results are independent of block size and worker count.
std::vector<std::vector<ScoredIndex>> top_k_dots(
    const Eigen::MatrixXd& queries, const Eigen::MatrixXd& candidates, int k,
    const std::unordered_set<Eigen::Index>& exclude = {},
    const RetrievalOptions& opt = {});

/// Per query: argmax over candidates of (2 * dot - offset[candidate]).
/// Same exclusion, tie-break, and determinism contract as top_k_dots.
std::vector<ScoredIndex> adjusted_argmax(
    const Eigen::MatrixXd& queries, const Eigen::MatrixXd& candidates,
    const std::vector<double>& offsets,
    const std::unordered_set<Eigen::Index>& exclude = {},
    const RetrievalOptions& opt = {});

/// X * W^T with every mapped row renormalized to unit length (rows whose
/// mapped norm falls below 1e-12 are zeroed).
Eigen::MatrixXd map_and_renormalize(const MappingMatrix& w, const Eigen::MatrixXd& rows);

/// Nearest-neighbor translation: t(i) = argmax_j <Wx_i, y_j> over non-flagged
/// target rows. Score is the cosine after renormalizing the mapped query.
TranslationResult nn_translate(const MappingMatrix& w, const Eigen::MatrixXd& queries,
                               const EmbeddingMatrix& target,
                               const RetrievalOptions& opt = {});

/// r(i) = mean of the k largest cosines between points[i] and the pool rows.
/// All rows must be unit-norm.
NeighborCache mean_knn_similarity(const Eigen::MatrixXd& points,
                                  const Eigen::MatrixXd& pool, int k,
                                  const std::unordered_set<Eigen::Index>& exclude = {},
                                  const RetrievalOptions& opt = {});

/// CSLS translation: t(i) = argmin_j csls(Wx_i, y_j), with the target-side
/// neighborhood term computed against the full target matrix and the
/// source-side term against the mapped source_pool. Scores report the full
/// CSLS loss of the chosen pair (lower = more similar).
TranslationResult csls_translate(const MappingMatrix& w, const Eigen::MatrixXd& queries,
                                 const EmbeddingMatrix& target,
                                 const EmbeddingMatrix& source_pool, int k,
                                 const RetrievalOptions& opt = {});

/// The CSLS loss between two unit vectors given explicit neighbor pools:
/// -2 cos(x,y) + mean of k best cos(x, .) over y_pool
///            + mean of k best cos(., y) over x_pool.
double csls_loss(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 const Eigen::MatrixXd& y_pool, const Eigen::MatrixXd& x_pool, int k);

}  // namespace lexalign
