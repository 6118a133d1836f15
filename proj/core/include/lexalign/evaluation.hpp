#pragma once

#include "lexalign/baselines.hpp"
#include "lexalign/embeddings.hpp"
#include "lexalign/lexicon.hpp"
#include "lexalign/rcsls.hpp"
#include "lexalign/retrieval.hpp"

#include <map>
#include <string>
#include <vector>

namespace lexalign {

struct EvalSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> accuracies;
};

struct EvalReport {
  std::string pair_label;
  std::string method;
  Criterion criterion = Criterion::Csls;
  int k = 0;
  double accuracy = 0.0;
  std::size_t n_evaluated = 0;  // distinct source words scored
  std::size_t skipped_oov = 0;  // lexicon lines dropped at load time
  std::string config_snapshot;
  std::vector<EvalSeries> series;
};

std::string report_to_json(const EvalReport& report);
/// Plain-text table: one row per series point, or a single row when there is
/// no sweep.
std::string report_to_table(const EvalReport& report);

/// P@1 over distinct source words: a word counts correct iff its predicted
/// index is one of its reference translations. `predictions.query_indices`
/// must cover every distinct source of eval_lex.
EvalReport precision_at_1(const TranslationResult& predictions,
                          const BilingualLexicon& eval_lex);

/// Translates the distinct sources of eval_lex (ascending index) with the
/// given map and scores P@1. For CSLS the source-side neighborhoods are
/// computed over the full loaded source vocabulary.
EvalReport evaluate_mapping(const MappingMatrix& w, const EmbeddingMatrix& src,
                            const EmbeddingMatrix& tgt, const BilingualLexicon& eval_lex,
                            Criterion criterion, int k,
                            const RetrievalOptions& opt = {});

struct EvalData {
  const EmbeddingMatrix& src;
  const EmbeddingMatrix& tgt;
  const BilingualLexicon& train_lex;
  const BilingualLexicon& eval_lex;
};

enum class SweepMethod { Procrustes, Rcsls };

/// Trains one model per training-lexicon prefix size and evaluates each with
/// CSLS at config.k. Sizes must be ascending and within the available pairs.
EvalReport lexicon_size_sweep(const std::vector<std::size_t>& sizes, SweepMethod method,
                              const EvalData& data, const TrainConfig& config);

/// Evaluates Procrustes+CSLS (criterion-only sensitivity) and RCSLS
/// (loss + criterion sensitivity) at each k. Emits one series per method.
EvalReport knn_sweep(const std::vector<int>& ks, const EvalData& data,
                     const TrainConfig& config);

struct CriterionComparison {
  std::vector<EvalReport> reports;  // NN and CSLS per method
  std::map<std::string, double> nn_minus_csls;
};

/// Evaluates each named mapping under both retrieval criteria.
CriterionComparison criterion_comparison(
    const EvalData& data,
    const std::vector<std::pair<std::string, MappingMatrix>>& mappings, int k,
    const RetrievalOptions& opt = {});

/// Brute-force oracle for the max over size-k subsets of a dot-product list:
/// enumerates all C(n, k) subsets and returns the maximum subset sum. Guarded
/// to n <= 20.
double subset_max_oracle(const std::vector<double>& dots, int k);

}  // namespace lexalign
