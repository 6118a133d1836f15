#pragma once

#include "lexalign/baselines.hpp"
#include "lexalign/embeddings.hpp"
#include "lexalign/lexicon.hpp"
#include "lexalign/retrieval.hpp"

#include <vector>

namespace lexalign {

enum class PairingRule { BestInferred, MutualCsls };

const char* to_string(PairingRule r);

struct RefinementConfig {
  int rounds = 1;
  // Candidate pool = the most frequent words, i.e. the lowest row indices.
  Eigen::Index candidate_pool_size = 10000;
  PairingRule pairing = PairingRule::MutualCsls;
  int criterion_k = 10;
  int threads = 0;
};

struct RefinementResult {
  MappingMatrix mapping;
  std::vector<std::size_t> lexicon_sizes;  // augmented size after each round
  std::vector<BilingualLexicon::Pair> final_pairs;  // sorted, duplicates merged
};

/// Iterates: infer translations for the candidate pool under CSLS, keep pairs
/// per the pairing rule (mutual keeps (i,j) only when i -> j and j -> i),
/// union them into the running lexicon, and re-fit with Procrustes. The seed
/// pairs are retained at every round.
RefinementResult refine(const MappingMatrix& w0, const EmbeddingMatrix& src,
                        const EmbeddingMatrix& tgt, const BilingualLexicon& seed_lex,
                        const RefinementConfig& config);

}  // namespace lexalign
