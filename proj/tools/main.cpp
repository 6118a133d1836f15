#include "lexalign/embeddings.hpp"
#include "lexalign/evaluation.hpp"
#include "lexalign/lexicon.hpp"
#include "lexalign/rcsls.hpp"
#include "lexalign/refinement.hpp"
#include "lexalign/retrieval.hpp"
#include "lexalign/run_io.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace lexalign;

std::string fmt_double(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

std::string join_doubles(const std::vector<double>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << fmt_double(values[i]);
  }
  return out.str();
}

template <typename T>
std::string join_ints(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << values[i];
  }
  return out.str();
}

int resolved_threads(int flag_value) {
  if (const char* env = std::getenv("LEXALIGN_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) return static_cast<int>(parsed);
  }
  return flag_value;
}

EmbeddingMatrix load_prepared(const std::string& path, std::size_t max_vocab, bool center) {
  EmbeddingMatrix raw = load_text_embeddings(path, max_vocab);
  return center ? center_then_normalize(raw) : l2_normalize(raw);
}

std::string pair_label(const std::string& src_path, const std::string& tgt_path) {
  return std::filesystem::path(src_path).stem().string() + "-" +
         std::filesystem::path(tgt_path).stem().string();
}

struct CommonArgs {
  std::string src_emb;
  std::string tgt_emb;
  std::size_t max_vocab = 0;
  bool center = false;
  int threads = 0;
  std::string manifest;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--src-emb", args.src_emb, "Source embeddings (text format)")->required();
  cmd->add_option("--tgt-emb", args.tgt_emb, "Target embeddings (text format)")->required();
  cmd->add_option("--max-vocab", args.max_vocab, "Cap on loaded vocabulary size (0 = all)");
  cmd->add_flag("--center", args.center, "Mean-center before length normalization");
  cmd->add_option("--threads", args.threads, "Worker cap (0 = hardware); result-invariant");
  cmd->add_option("--manifest", args.manifest, "Manifest path (default: primary output + .manifest.json)");
}

std::filesystem::path manifest_path(const CommonArgs& common, const std::string& primary_output) {
  if (!common.manifest.empty()) return common.manifest;
  return primary_output + ".manifest.json";
}

struct AlignArgs {
  CommonArgs common;
  std::string lexicon;
  std::string method;
  std::string constraint = "none";
  int k = 10;
  std::vector<double> learning_rates = {1.0, 10.0, 25.0, 50.0};
  std::vector<int> epochs = {10, 20};
  bool extended_norm = false;
  Eigen::Index pool_cap = 0;
  std::string loss = "linear";
  std::uint64_t seed = 42;
  Eigen::Index batch_size = 0;
  double l2_reg = 0.0;
  double val_fraction = 0.1;
  std::string out_map;
  std::string out_aligned;
};

int run_align(const AlignArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const int threads = resolved_threads(args.common.threads);

  const EmbeddingMatrix src =
      load_prepared(args.common.src_emb, args.common.max_vocab, args.common.center);
  const EmbeddingMatrix tgt =
      load_prepared(args.common.tgt_emb, args.common.max_vocab, args.common.center);
  if (src.dim() != tgt.dim()) {
    throw std::runtime_error("embedding dimensions differ between languages");
  }
  const BilingualLexicon lex = load_lexicon(args.lexicon, src.vocab, tgt.vocab);

  RunManifest manifest;
  manifest.command = "align";
  manifest.seed = args.seed;
  manifest.config = {
      {"src-emb", args.common.src_emb},
      {"tgt-emb", args.common.tgt_emb},
      {"lexicon", args.lexicon},
      {"method", args.method},
      {"constraint", args.constraint},
      {"k", std::to_string(args.k)},
      {"lr", join_doubles(args.learning_rates)},
      {"epochs", join_ints(args.epochs)},
      {"extended-norm", args.extended_norm ? "true" : "false"},
      {"pool-cap", std::to_string(args.pool_cap)},
      {"center", args.common.center ? "true" : "false"},
      {"max-vocab", std::to_string(args.common.max_vocab)},
      {"loss", args.loss},
      {"seed", std::to_string(args.seed)},
      {"batch-size", std::to_string(args.batch_size)},
      {"l2-reg", fmt_double(args.l2_reg)},
      {"val-fraction", fmt_double(args.val_fraction)},
      {"threads", std::to_string(args.common.threads)},
  };
  manifest.input_digests = {
      {args.common.src_emb, file_digest_hex(args.common.src_emb)},
      {args.common.tgt_emb, file_digest_hex(args.common.tgt_emb)},
      {args.lexicon, file_digest_hex(args.lexicon)},
  };
  manifest.outputs.emplace_back("lexicon_pairs", std::to_string(lex.size()));
  manifest.outputs.emplace_back("lexicon_coverage", fmt_double(lex.coverage));
  manifest.outputs.emplace_back("skipped_oov", std::to_string(lex.skipped_oov));

  const auto n = static_cast<Eigen::Index>(lex.pairs.size());
  Eigen::MatrixXd x(n, src.dim());
  Eigen::MatrixXd y(n, tgt.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [a, b] = lex.pairs[static_cast<std::size_t>(i)];
    x.row(i) = src.vectors.row(a);
    y.row(i) = tgt.vectors.row(b);
  }

  MappingMatrix mapping;
  if (args.method == "lsq") {
    mapping = least_squares_fit(x, y);
  } else if (args.method == "procrustes") {
    mapping = procrustes_fit(x, y);
  } else {
    TrainConfig config;
    config.learning_rates = args.learning_rates;
    config.epochs_grid = args.epochs;
    config.k = args.k;
    config.constraint = args.constraint == "spectral" ? ConstraintDomain::SpectralBall
                                                      : ConstraintDomain::Unconstrained;
    config.extended_normalization = args.extended_norm;
    config.pool_cap = args.pool_cap;
    config.batch_size = args.batch_size;
    config.l2_reg = args.l2_reg;
    config.loss_variant =
        args.loss == "logsumexp" ? LossVariant::LogSumExp : LossVariant::Linear;
    config.seed = args.seed;
    config.threads = threads;
    config.validate();

    const std::size_t grid_points = config.learning_rates.size() * config.epochs_grid.size();
    if (grid_points > 1) {
      if (args.val_fraction <= 0.0 || args.val_fraction >= 1.0) {
        throw std::runtime_error("grid search needs --val-fraction strictly inside (0,1)");
      }
      const auto [train_part, valid_part] = split_validation(lex, args.val_fraction, args.seed);
      const GridSearchResult searched = grid_search(src, tgt, train_part, valid_part, config);
      config = searched.best_config;
      manifest.outputs.emplace_back("grid_valid_accuracy",
                                    fmt_double(searched.valid_accuracy));
    }
    manifest.outputs.emplace_back("lr_selected", fmt_double(config.learning_rates.front()));
    manifest.outputs.emplace_back("epochs_selected",
                                  std::to_string(config.epochs_grid.front()));

    const NeighborPools pools =
        build_neighbor_pools(src, tgt, lex, config.extended_normalization, config.pool_cap);
    auto [trained, trace] = train_rcsls(src, tgt, lex, pools, config);
    mapping = std::move(trained);
    manifest.outputs.emplace_back("initial_objective", fmt_double(trace.initial_objective));
    manifest.outputs.emplace_back("best_objective", fmt_double(trace.best_objective));
  }

  save_mapping(mapping, args.out_map);
  manifest.outputs.emplace_back("map", args.out_map);

  if (!args.out_aligned.empty()) {
    EmbeddingMatrix aligned;
    aligned.vocab = src.vocab;
    aligned.vectors = map_and_renormalize(mapping, src.vectors);
    aligned.norm_state = NormState::L2Normalized;
    save_text_embeddings(aligned, args.out_aligned);
    manifest.outputs.emplace_back("aligned", args.out_aligned);
  }

  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(manifest, manifest_path(args.common, args.out_map));
  std::cout << "wrote " << args.out_map << "\n";
  return 0;
}

struct EvaluateArgs {
  CommonArgs common;
  std::string map;
  std::string eval_lexicon;
  std::string criterion = "csls";
  int k = 10;
  bool drop_exact = false;
  std::string sweep = "none";
  std::string sweep_method = "procrustes";
  std::string train_lexicon;
  std::vector<std::size_t> sizes;
  std::vector<int> ks;
  std::vector<double> learning_rates = {25.0};
  std::vector<int> epochs = {10};
  std::uint64_t seed = 42;
  bool fp32_scoring = false;
  std::string out_report;
};

int run_evaluate(const EvaluateArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const int threads = resolved_threads(args.common.threads);

  const EmbeddingMatrix src =
      load_prepared(args.common.src_emb, args.common.max_vocab, args.common.center);
  const EmbeddingMatrix tgt =
      load_prepared(args.common.tgt_emb, args.common.max_vocab, args.common.center);
  const MappingMatrix mapping = load_mapping(args.map);
  if (mapping.w.cols() != src.dim() || src.dim() != tgt.dim()) {
    throw std::runtime_error("map dimension does not match the embeddings");
  }

  BilingualLexicon eval_lex = load_lexicon(args.eval_lexicon, src.vocab, tgt.vocab);
  if (args.drop_exact) eval_lex = filter_exact_matches(eval_lex, src.vocab, tgt.vocab);

  RetrievalOptions opt;
  opt.threads = threads;
  opt.fp32_scores = args.fp32_scoring;

  const Criterion criterion = args.criterion == "nn" ? Criterion::Nn : Criterion::Csls;

  EvalReport report;
  std::optional<BilingualLexicon> train_lex;
  if (args.sweep != "none") {
    if (args.train_lexicon.empty()) {
      throw std::runtime_error("--sweep needs --train-lexicon");
    }
    train_lex = load_lexicon(args.train_lexicon, src.vocab, tgt.vocab);
  }

  TrainConfig config;
  config.learning_rates = args.learning_rates;
  config.epochs_grid = args.epochs;
  config.k = args.k;
  config.seed = args.seed;
  config.threads = threads;

  if (args.sweep == "none") {
    report = evaluate_mapping(mapping, src, tgt, eval_lex, criterion, args.k, opt);
    report.method = std::filesystem::path(args.map).stem().string();
  } else if (args.sweep == "lexsize") {
    if (args.sizes.empty()) throw std::runtime_error("--sweep lexsize needs --sizes");
    const EvalData data{src, tgt, *train_lex, eval_lex};
    const SweepMethod method = args.sweep_method == "rcsls" ? SweepMethod::Rcsls
                                                            : SweepMethod::Procrustes;
    report = lexicon_size_sweep(args.sizes, method, data, config);
  } else {
    if (args.ks.empty()) throw std::runtime_error("--sweep knn needs --ks");
    const EvalData data{src, tgt, *train_lex, eval_lex};
    report = knn_sweep(args.ks, data, config);
  }
  report.pair_label = pair_label(args.common.src_emb, args.common.tgt_emb);

  const std::string json = report_to_json(report);
  std::cout << report_to_table(report);
  if (!args.out_report.empty()) {
    std::ofstream out(args.out_report);
    if (!out) throw std::runtime_error(args.out_report + ": cannot open for writing");
    out << json;

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.seed = args.seed;
    manifest.config = {
        {"src-emb", args.common.src_emb},
        {"tgt-emb", args.common.tgt_emb},
        {"map", args.map},
        {"eval-lexicon", args.eval_lexicon},
        {"criterion", args.criterion},
        {"k", std::to_string(args.k)},
        {"drop-exact-matches", args.drop_exact ? "true" : "false"},
        {"sweep", args.sweep},
        {"sweep-method", args.sweep_method},
        {"train-lexicon", args.train_lexicon},
        {"sizes", join_ints(args.sizes)},
        {"ks", join_ints(args.ks)},
        {"lr", join_doubles(args.learning_rates)},
        {"epochs", join_ints(args.epochs)},
        {"center", args.common.center ? "true" : "false"},
        {"max-vocab", std::to_string(args.common.max_vocab)},
        {"seed", std::to_string(args.seed)},
        {"fp32-scoring", args.fp32_scoring ? "true" : "false"},
        {"threads", std::to_string(args.common.threads)},
    };
    manifest.input_digests = {
        {args.common.src_emb, file_digest_hex(args.common.src_emb)},
        {args.common.tgt_emb, file_digest_hex(args.common.tgt_emb)},
        {args.map, file_digest_hex(args.map)},
        {args.eval_lexicon, file_digest_hex(args.eval_lexicon)},
    };
    manifest.outputs.emplace_back("report", args.out_report);
    manifest.outputs.emplace_back("accuracy", fmt_double(report.accuracy));
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(manifest, manifest_path(args.common, args.out_report));
  }
  return 0;
}

struct RefineArgs {
  CommonArgs common;
  std::string map;
  std::string lexicon;
  int rounds = 1;
  Eigen::Index pool_size = 10000;
  std::string pairing = "mutual";
  int k = 10;
  std::string out_map;
};

int run_refine(const RefineArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const int threads = resolved_threads(args.common.threads);

  const EmbeddingMatrix src =
      load_prepared(args.common.src_emb, args.common.max_vocab, args.common.center);
  const EmbeddingMatrix tgt =
      load_prepared(args.common.tgt_emb, args.common.max_vocab, args.common.center);
  const MappingMatrix initial = load_mapping(args.map);
  if (initial.w.cols() != src.dim() || src.dim() != tgt.dim()) {
    throw std::runtime_error("map dimension does not match the embeddings");
  }
  const BilingualLexicon seed_lex = load_lexicon(args.lexicon, src.vocab, tgt.vocab);

  RefinementConfig config;
  config.rounds = args.rounds;
  config.candidate_pool_size = std::min<Eigen::Index>(args.pool_size,
                                                      std::min(src.rows(), tgt.rows()));
  config.pairing = args.pairing == "best" ? PairingRule::BestInferred
                                          : PairingRule::MutualCsls;
  config.criterion_k = args.k;
  config.threads = threads;

  const RefinementResult result = refine(initial, src, tgt, seed_lex, config);
  save_mapping(result.mapping, args.out_map);

  RunManifest manifest;
  manifest.command = "refine";
  manifest.config = {
      {"src-emb", args.common.src_emb},
      {"tgt-emb", args.common.tgt_emb},
      {"map", args.map},
      {"lexicon", args.lexicon},
      {"rounds", std::to_string(args.rounds)},
      {"pool-size", std::to_string(config.candidate_pool_size)},
      {"pairing", args.pairing},
      {"k", std::to_string(args.k)},
      {"center", args.common.center ? "true" : "false"},
      {"max-vocab", std::to_string(args.common.max_vocab)},
      {"threads", std::to_string(args.common.threads)},
  };
  manifest.input_digests = {
      {args.common.src_emb, file_digest_hex(args.common.src_emb)},
      {args.common.tgt_emb, file_digest_hex(args.common.tgt_emb)},
      {args.map, file_digest_hex(args.map)},
      {args.lexicon, file_digest_hex(args.lexicon)},
  };
  manifest.outputs.emplace_back("map", args.out_map);
  manifest.outputs.emplace_back("round_sizes", join_ints(result.lexicon_sizes));
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(manifest, manifest_path(args.common, args.out_map));
  std::cout << "wrote " << args.out_map << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual word embedding alignment"};
  app.require_subcommand(1);

  AlignArgs align_args;
  CLI::App* align = app.add_subcommand("align", "Fit a linear map from a seed lexicon");
  add_common(align, align_args.common);
  align->add_option("--lexicon", align_args.lexicon, "Seed training lexicon")->required();
  align->add_option("--method", align_args.method, "lsq, procrustes, or rcsls")
      ->required()
      ->check(CLI::IsMember({"lsq", "procrustes", "rcsls"}));
  align->add_option("--constraint", align_args.constraint, "none or spectral")
      ->check(CLI::IsMember({"none", "spectral"}));
  align->add_option("--k", align_args.k, "Neighborhood size in the loss");
  align->add_option("--lr", align_args.learning_rates, "Learning-rate grid")->delimiter(',');
  align->add_option("--epochs", align_args.epochs, "Epoch grid")->delimiter(',');
  align->add_flag("--extended-norm", align_args.extended_norm,
                  "Neighbor pools over full vocabularies instead of seed pairs");
  align->add_option("--pool-cap", align_args.pool_cap, "Cap on extended pools (0 = full)");
  align->add_option("--loss", align_args.loss, "linear or logsumexp")
      ->check(CLI::IsMember({"linear", "logsumexp"}));
  align->add_option("--seed", align_args.seed, "RNG seed");
  align->add_option("--batch-size", align_args.batch_size, "0 = full batch");
  align->add_option("--l2-reg", align_args.l2_reg, "L2 penalty weight");
  align->add_option("--val-fraction", align_args.val_fraction,
                    "Validation share of sources for grid search");
  align->add_option("--out-map", align_args.out_map, "Mapping matrix output")->required();
  align->add_option("--out-aligned", align_args.out_aligned,
                    "Mapped and renormalized source vectors output");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a map on a test lexicon");
  add_common(evaluate, eval_args.common);
  evaluate->add_option("--map", eval_args.map, "Mapping matrix file")->required();
  evaluate->add_option("--eval-lexicon", eval_args.eval_lexicon, "Test lexicon")->required();
  evaluate->add_option("--criterion", eval_args.criterion, "nn or csls")
      ->check(CLI::IsMember({"nn", "csls"}));
  evaluate->add_option("--k", eval_args.k, "Neighborhood size for csls");
  evaluate->add_flag("--drop-exact-matches", eval_args.drop_exact,
                     "Drop pairs whose words are spelled identically");
  evaluate->add_option("--sweep", eval_args.sweep, "none, lexsize, or knn")
      ->check(CLI::IsMember({"none", "lexsize", "knn"}));
  evaluate->add_option("--sweep-method", eval_args.sweep_method,
                       "Training method for lexsize sweeps")
      ->check(CLI::IsMember({"procrustes", "rcsls"}));
  evaluate->add_option("--train-lexicon", eval_args.train_lexicon,
                       "Training lexicon for sweeps");
  evaluate->add_option("--sizes", eval_args.sizes, "Lexicon sizes for lexsize sweeps")
      ->delimiter(',');
  evaluate->add_option("--ks", eval_args.ks, "k values for knn sweeps")->delimiter(',');
  evaluate->add_option("--lr", eval_args.learning_rates, "Learning rate for sweep training")
      ->delimiter(',');
  evaluate->add_option("--epochs", eval_args.epochs, "Epochs for sweep training")
      ->delimiter(',');
  evaluate->add_option("--seed", eval_args.seed, "RNG seed");
  evaluate->add_flag("--fp32-scoring", eval_args.fp32_scoring,
                     "Score in single precision (indices stay exact on separated data)");
  evaluate->add_option("--out-report", eval_args.out_report, "JSON report output");

  RefineArgs refine_args;
  CLI::App* refine = app.add_subcommand("refine", "Augment the lexicon and refit");
  add_common(refine, refine_args.common);
  refine->add_option("--map", refine_args.map, "Initial mapping matrix")->required();
  refine->add_option("--lexicon", refine_args.lexicon, "Seed lexicon")->required();
  refine->add_option("--rounds", refine_args.rounds, "Refinement rounds");
  refine->add_option("--pool-size", refine_args.pool_size,
                     "Candidate pool size (0 = refit on seeds only)");
  refine->add_option("--pairing", refine_args.pairing, "best or mutual")
      ->check(CLI::IsMember({"best", "mutual"}));
  refine->add_option("--k", refine_args.k, "CSLS neighborhood size");
  refine->add_option("--out-map", refine_args.out_map, "Refined map output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (align->parsed()) return run_align(align_args);
    if (evaluate->parsed()) return run_evaluate(eval_args);
    if (refine->parsed()) return run_refine(refine_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
