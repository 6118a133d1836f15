#include "lexalign/evaluation.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace lexalign {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
  }
  return out;
}

std::string summarize_config(const TrainConfig& config) {
  std::ostringstream out;
  out << "k=" << config.k << " lr=" << config.learning_rates.front()
      << " epochs=" << config.epochs_grid.front()
      << " constraint=" << to_string(config.constraint)
      << " loss=" << to_string(config.loss_variant)
      << " extended_norm=" << (config.extended_normalization ? "true" : "false")
      << " seed=" << config.seed;
  return out.str();
}

MappingMatrix train_for_sweep(SweepMethod method, const EmbeddingMatrix& src,
                              const EmbeddingMatrix& tgt, const BilingualLexicon& lex,
                              const TrainConfig& config) {
  if (method == SweepMethod::Procrustes) {
    const auto n = static_cast<Eigen::Index>(lex.pairs.size());
    Eigen::MatrixXd x(n, src.dim());
    Eigen::MatrixXd y(n, tgt.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& [a, b] = lex.pairs[static_cast<std::size_t>(i)];
      x.row(i) = src.vectors.row(a);
      y.row(i) = tgt.vectors.row(b);
    }
    return procrustes_fit(x, y);
  }
  const NeighborPools pools = build_neighbor_pools(src, tgt, lex,
                                                   config.extended_normalization,
                                                   config.pool_cap);
  return train_rcsls(src, tgt, lex, pools, config).first;
}

const char* sweep_method_label(SweepMethod method) {
  return method == SweepMethod::Procrustes ? "procrustes" : "rcsls";
}

}  // namespace

EvalReport precision_at_1(const TranslationResult& predictions,
                          const BilingualLexicon& eval_lex) {
  if (eval_lex.eval_map.empty()) throw std::invalid_argument("precision: empty evaluable set");
  if (predictions.predicted.size() != predictions.query_indices.size()) {
    throw std::invalid_argument("precision: malformed predictions");
  }

  std::unordered_map<Eigen::Index, Eigen::Index> by_source;
  for (std::size_t i = 0; i < predictions.query_indices.size(); ++i) {
    by_source[predictions.query_indices[i]] = predictions.predicted[i];
  }

  std::size_t correct = 0;
  for (const auto& [source, translations] : eval_lex.eval_map) {
    const auto it = by_source.find(source);
    if (it == by_source.end()) {
      throw std::invalid_argument("precision: missing prediction for a source word");
    }
    if (translations.count(it->second) != 0) ++correct;
  }

  EvalReport report;
  report.criterion = predictions.criterion;
  report.n_evaluated = eval_lex.eval_map.size();
  report.skipped_oov = eval_lex.skipped_oov;
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n_evaluated);
  return report;
}

EvalReport evaluate_mapping(const MappingMatrix& w, const EmbeddingMatrix& src,
                            const EmbeddingMatrix& tgt, const BilingualLexicon& eval_lex,
                            Criterion criterion, int k, const RetrievalOptions& opt) {
  if (eval_lex.eval_map.empty()) throw std::invalid_argument("evaluate: empty evaluable set");

  std::vector<Eigen::Index> sources;
  sources.reserve(eval_lex.eval_map.size());
  for (const auto& [source, translations] : eval_lex.eval_map) sources.push_back(source);

  const Eigen::MatrixXd queries = gather_rows(src.vectors, sources);
  TranslationResult result = criterion == Criterion::Nn
                                 ? nn_translate(w, queries, tgt, opt)
                                 : csls_translate(w, queries, tgt, src, k, opt);
  result.query_indices = sources;

  EvalReport report = precision_at_1(result, eval_lex);
  report.k = k;
  return report;
}

EvalReport lexicon_size_sweep(const std::vector<std::size_t>& sizes, SweepMethod method,
                              const EvalData& data, const TrainConfig& config) {
  config.validate();
  if (sizes.empty()) throw std::invalid_argument("size sweep: no sizes");
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw std::invalid_argument("size sweep: sizes must be ascending");
  }
  if (sizes.front() < 1 || sizes.back() > data.train_lex.pairs.size()) {
    throw std::invalid_argument("size sweep: size out of range");
  }

  RetrievalOptions opt;
  opt.threads = config.threads;

  EvalSeries series;
  series.label = sweep_method_label(method);
  EvalReport last;
  for (std::size_t size : sizes) {
    const std::vector<BilingualLexicon::Pair> prefix(data.train_lex.pairs.begin(),
                                                     data.train_lex.pairs.begin() +
                                                         static_cast<std::ptrdiff_t>(size));
    const BilingualLexicon truncated = make_lexicon(prefix);
    const MappingMatrix w = train_for_sweep(method, data.src, data.tgt, truncated, config);
    last = evaluate_mapping(w, data.src, data.tgt, data.eval_lex, Criterion::Csls,
                            config.k, opt);
    series.xs.push_back(static_cast<double>(size));
    series.accuracies.push_back(last.accuracy);
  }

  EvalReport report = last;
  report.method = series.label;
  report.config_snapshot = summarize_config(config);
  report.series.push_back(std::move(series));
  return report;
}

EvalReport knn_sweep(const std::vector<int>& ks, const EvalData& data,
                     const TrainConfig& config) {
  config.validate();
  if (ks.empty()) throw std::invalid_argument("knn sweep: no k values");
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("knn sweep: k must be positive");
  }

  RetrievalOptions opt;
  opt.threads = config.threads;

  const MappingMatrix procrustes =
      train_for_sweep(SweepMethod::Procrustes, data.src, data.tgt, data.train_lex, config);

  EvalSeries procrustes_series;
  procrustes_series.label = "procrustes+csls";
  EvalSeries rcsls_series;
  rcsls_series.label = "rcsls";

  EvalReport last;
  for (int k : ks) {
    const EvalReport pk = evaluate_mapping(procrustes, data.src, data.tgt, data.eval_lex,
                                           Criterion::Csls, k, opt);
    procrustes_series.xs.push_back(static_cast<double>(k));
    procrustes_series.accuracies.push_back(pk.accuracy);

    TrainConfig at_k = config;
    at_k.k = k;
    const MappingMatrix w =
        train_for_sweep(SweepMethod::Rcsls, data.src, data.tgt, data.train_lex, at_k);
    last = evaluate_mapping(w, data.src, data.tgt, data.eval_lex, Criterion::Csls, k, opt);
    rcsls_series.xs.push_back(static_cast<double>(k));
    rcsls_series.accuracies.push_back(last.accuracy);
  }

  EvalReport report = last;
  report.method = "rcsls";
  report.config_snapshot = summarize_config(config);
  report.series.push_back(std::move(procrustes_series));
  report.series.push_back(std::move(rcsls_series));
  return report;
}

CriterionComparison criterion_comparison(
    const EvalData& data, const std::vector<std::pair<std::string, MappingMatrix>>& mappings,
    int k, const RetrievalOptions& opt) {
  CriterionComparison comparison;
  for (const auto& [name, mapping] : mappings) {
    EvalReport nn = evaluate_mapping(mapping, data.src, data.tgt, data.eval_lex,
                                     Criterion::Nn, k, opt);
    nn.method = name;
    EvalReport csls = evaluate_mapping(mapping, data.src, data.tgt, data.eval_lex,
                                       Criterion::Csls, k, opt);
    csls.method = name;
    comparison.nn_minus_csls[name] = nn.accuracy - csls.accuracy;
    comparison.reports.push_back(std::move(nn));
    comparison.reports.push_back(std::move(csls));
  }
  return comparison;
}

double subset_max_oracle(const std::vector<double>& dots, int k) {
  const auto n = static_cast<int>(dots.size());
  if (n > 20) throw std::invalid_argument("subset oracle: list too long");
  if (k < 1 || k > n) throw std::invalid_argument("subset oracle: k out of range");

  // Lexicographic subset enumeration; each subset sum accumulates in ascending
  // index order so it is comparable bit for bit with the solver's sums.
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;

  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    double sum = 0.0;
    for (int idx : pick) sum += dots[static_cast<std::size_t>(idx)];
    best = std::max(best, sum);

    int pos = k - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < k; ++i) {
      pick[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return best;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["pair"] = report.pair_label;
  doc["method"] = report.method;
  doc["criterion"] = to_string(report.criterion);
  doc["k"] = report.k;
  doc["accuracy"] = report.accuracy;
  doc["n_evaluated"] = report.n_evaluated;
  doc["skipped_oov"] = report.skipped_oov;
  doc["config"] = report.config_snapshot;
  doc["series"] = nlohmann::json::array();
  for (const auto& series : report.series) {
    nlohmann::json entry;
    entry["label"] = series.label;
    entry["xs"] = series.xs;
    entry["accuracies"] = series.accuracies;
    doc["series"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %-9s %4s %10s %12s\n", "method", "criterion",
                "k", "accuracy", "n_evaluated");
  out << line;
  if (report.series.empty()) {
    std::snprintf(line, sizeof(line), "%-18s %-9s %4d %10.4f %12zu\n",
                  report.method.c_str(), to_string(report.criterion), report.k,
                  report.accuracy, report.n_evaluated);
    out << line;
    return out.str();
  }
  for (const auto& series : report.series) {
    for (std::size_t i = 0; i < series.xs.size(); ++i) {
      std::snprintf(line, sizeof(line), "%-18s %-9s %4.0f %10.4f %12zu\n",
                    series.label.c_str(), to_string(report.criterion), series.xs[i],
                    series.accuracies[i], report.n_evaluated);
      out << line;
    }
  }
  return out.str();
}

}  // namespace lexalign
