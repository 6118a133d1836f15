#include "lexalign/refinement.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>

namespace lexalign {

namespace {

std::unordered_set<Eigen::Index> zero_rows_below(const std::unordered_set<Eigen::Index>& all,
                                                 Eigen::Index bound) {
  std::unordered_set<Eigen::Index> subset;
  for (Eigen::Index idx : all) {
    if (idx < bound) subset.insert(idx);
  }
  return subset;
}

}  // namespace

const char* to_string(PairingRule r) {
  return r == PairingRule::BestInferred ? "best_inferred" : "mutual_csls";
}

RefinementResult refine(const MappingMatrix& w0, const EmbeddingMatrix& src,
                        const EmbeddingMatrix& tgt, const BilingualLexicon& seed_lex,
                        const RefinementConfig& config) {
  if (config.rounds < 1) throw std::invalid_argument("refine: rounds must be at least 1");
  if (config.criterion_k < 1) throw std::invalid_argument("refine: criterion_k must be positive");
  if (seed_lex.pairs.empty()) throw std::invalid_argument("refine: empty seed lexicon");
  const Eigen::Index pool = config.candidate_pool_size;
  if (pool < 0 || pool > std::min(src.rows(), tgt.rows())) {
    throw std::invalid_argument("refine: candidate pool exceeds a vocabulary");
  }

  std::set<BilingualLexicon::Pair> augmented(seed_lex.pairs.begin(), seed_lex.pairs.end());

  RetrievalOptions opt;
  opt.threads = config.threads;

  MappingMatrix w = w0;
  RefinementResult result;

  for (int round = 0; round < config.rounds; ++round) {
    if (pool > 0) {
      const Eigen::MatrixXd src_pool = src.vectors.topRows(pool);
      const Eigen::MatrixXd tgt_pool = tgt.vectors.topRows(pool);
      const auto src_zero = zero_rows_below(src.zero_rows, pool);
      const auto tgt_zero = zero_rows_below(tgt.zero_rows, pool);
      const Eigen::MatrixXd mapped = map_and_renormalize(w, src_pool);

      // Forward CSLS argmax over the target pool; the query-side neighborhood
      // term is constant per query and drops out of the argmax.
      const NeighborCache r_fwd =
          mean_knn_similarity(tgt_pool, mapped, config.criterion_k, src_zero, opt);
      const auto forward = adjusted_argmax(mapped, tgt_pool, r_fwd.r_values, tgt_zero, opt);

      std::vector<ScoredIndex> backward;
      if (config.pairing == PairingRule::MutualCsls) {
        const NeighborCache r_bwd =
            mean_knn_similarity(mapped, tgt_pool, config.criterion_k, tgt_zero, opt);
        backward = adjusted_argmax(tgt_pool, mapped, r_bwd.r_values, src_zero, opt);
      }

      for (Eigen::Index i = 0; i < pool; ++i) {
        if (src_zero.count(i) != 0) continue;
        const Eigen::Index j = forward[static_cast<std::size_t>(i)].index;
        if (config.pairing == PairingRule::MutualCsls &&
            backward[static_cast<std::size_t>(j)].index != i) {
          continue;
        }
        augmented.insert({i, j});
      }
    }

    result.lexicon_sizes.push_back(augmented.size());

    const auto n = static_cast<Eigen::Index>(augmented.size());
    Eigen::MatrixXd x_a(n, src.dim());
    Eigen::MatrixXd y_a(n, tgt.dim());
    Eigen::Index row = 0;
    for (const auto& [a, b] : augmented) {
      x_a.row(row) = src.vectors.row(a);
      y_a.row(row) = tgt.vectors.row(b);
      ++row;
    }
    w = procrustes_fit(x_a, y_a);
  }

  result.mapping = std::move(w);
  result.final_pairs.assign(augmented.begin(), augmented.end());
  return result;
}

}  // namespace lexalign
