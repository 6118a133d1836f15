#include "lexalign/rcsls.hpp"

#include "lexalign/evaluation.hpp"

#include "detail/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lexalign {

namespace {

// Selected neighbors for every pair, held in ascending candidate index order
// so that downstream sums have one canonical accumulation order.
struct NeighborSelection {
  std::vector<std::vector<Eigen::Index>> indices;
  std::vector<std::vector<double>> dots;
};

NeighborSelection select_neighbors(const Eigen::MatrixXd& queries,
                                   const Eigen::MatrixXd& pool, int k,
                                   const RetrievalOptions& opt) {
  auto lists = top_k_dots(queries, pool, k, {}, opt);
  NeighborSelection sel;
  sel.indices.resize(lists.size());
  sel.dots.resize(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    auto& list = lists[i];
    std::sort(list.begin(), list.end(),
              [](const ScoredIndex& a, const ScoredIndex& b) { return a.index < b.index; });
    sel.indices[i].reserve(list.size());
    sel.dots[i].reserve(list.size());
    for (const auto& entry : list) {
      sel.indices[i].push_back(entry.index);
      sel.dots[i].push_back(entry.score);
    }
  }
  return sel;
}

double penalty_value(const std::vector<double>& dots, LossVariant variant) {
  if (variant == LossVariant::Linear) {
    double sum = 0.0;
    for (double d : dots) sum += d;
    return sum;
  }
  const double m = *std::max_element(dots.begin(), dots.end());
  double sum = 0.0;
  for (double d : dots) sum += std::exp(d - m);
  return m + std::log(sum);
}

std::vector<double> softmax_weights(const std::vector<double>& dots) {
  const double m = *std::max_element(dots.begin(), dots.end());
  std::vector<double> w(dots.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < dots.size(); ++j) {
    w[j] = std::exp(dots[j] - m);
    sum += w[j];
  }
  for (double& v : w) v /= sum;
  return w;
}

void check_instance(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x_n,
                    const Eigen::MatrixXd& y_n, const NeighborPools& pools, int k) {
  if (x_n.rows() == 0 || x_n.rows() != y_n.rows()) {
    throw std::invalid_argument("rcsls: need equal, nonzero numbers of paired rows");
  }
  if (w.rows() != w.cols() || w.cols() != x_n.cols() || x_n.cols() != y_n.cols()) {
    throw std::invalid_argument("rcsls: dimension mismatch");
  }
  if (k < 1 || k > pools.target_size() || k > pools.source_size()) {
    throw std::invalid_argument("rcsls: k exceeds a neighbor pool");
  }
}

// Weighted row sums of `pool` per pair; uniform weights for the linear
// variant. Rows accumulate in ascending candidate index order.
Eigen::MatrixXd aggregate_rows(const NeighborSelection& sel, const Eigen::MatrixXd& pool,
                               LossVariant variant) {
  Eigen::MatrixXd agg(static_cast<Eigen::Index>(sel.indices.size()), pool.cols());
  agg.setZero();
  for (std::size_t i = 0; i < sel.indices.size(); ++i) {
    if (variant == LossVariant::Linear) {
      for (Eigen::Index j : sel.indices[i]) {
        agg.row(static_cast<Eigen::Index>(i)) += pool.row(j);
      }
    } else {
      const auto weights = softmax_weights(sel.dots[i]);
      for (std::size_t s = 0; s < sel.indices[i].size(); ++s) {
        agg.row(static_cast<Eigen::Index>(i)) += weights[s] * pool.row(sel.indices[i][s]);
      }
    }
  }
  return agg;
}

}  // namespace

const char* to_string(LossVariant v) {
  return v == LossVariant::Linear ? "linear" : "logsumexp";
}

const char* to_string(ConstraintDomain c) {
  switch (c) {
    case ConstraintDomain::Orthogonal: return "orthogonal";
    case ConstraintDomain::SpectralBall: return "spectral_ball";
    default: return "unconstrained";
  }
}

void TrainConfig::validate() const {
  if (learning_rates.empty()) throw std::invalid_argument("config: empty learning-rate grid");
  if (epochs_grid.empty()) throw std::invalid_argument("config: empty epochs grid");
  for (double lr : learning_rates) {
    if (!std::isfinite(lr) || lr < 0.0) {
      throw std::invalid_argument("config: learning rates must be finite and nonnegative");
    }
  }
  for (int e : epochs_grid) {
    if (e < 1) throw std::invalid_argument("config: epochs must be positive");
  }
  if (k < 1) throw std::invalid_argument("config: k must be at least 1");
  if (constraint == ConstraintDomain::Orthogonal) {
    throw std::invalid_argument("config: training supports spectral_ball or unconstrained");
  }
  if (!std::isfinite(l2_reg) || l2_reg < 0.0) {
    throw std::invalid_argument("config: l2_reg must be finite and nonnegative");
  }
  if (batch_size < 0) throw std::invalid_argument("config: batch_size must be nonnegative");
  if (pool_cap < 0) throw std::invalid_argument("config: pool_cap must be nonnegative");
  if (threads < 0) throw std::invalid_argument("config: threads must be nonnegative");
}

NeighborPools build_neighbor_pools(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                                   const BilingualLexicon& lex, bool extended,
                                   Eigen::Index pool_cap) {
  if (lex.pairs.empty()) throw std::invalid_argument("neighbor pools: empty lexicon");

  NeighborPools pools;
  if (!extended) {
    const auto n = static_cast<Eigen::Index>(lex.pairs.size());
    pools.source_pool.resize(n, src.dim());
    pools.target_pool.resize(n, tgt.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& [a, b] = lex.pairs[static_cast<std::size_t>(i)];
      pools.source_pool.row(i) = src.vectors.row(a);
      pools.target_pool.row(i) = tgt.vectors.row(b);
    }
  } else {
    Eigen::Index ns = src.rows();
    Eigen::Index nt = tgt.rows();
    if (pool_cap > 0) {
      ns = std::min(ns, pool_cap);
      nt = std::min(nt, pool_cap);
    }
    pools.source_pool = src.vectors.topRows(ns);
    pools.target_pool = tgt.vectors.topRows(nt);
  }
  return pools;
}

PenaltyTerms rcsls_penalty_terms(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x_n,
                                 const Eigen::MatrixXd& y_n, const NeighborPools& pools,
                                 int k, LossVariant variant, const RetrievalOptions& opt) {
  check_instance(w, x_n, y_n, pools, k);
  const Eigen::MatrixXd mapped_x = x_n * w.transpose();
  const Eigen::MatrixXd mapped_pool = pools.source_pool * w.transpose();
  const auto sel_target = select_neighbors(mapped_x, pools.target_pool, k, opt);
  const auto sel_source = select_neighbors(y_n, mapped_pool, k, opt);

  PenaltyTerms terms;
  terms.target_side.reserve(sel_target.dots.size());
  terms.source_side.reserve(sel_source.dots.size());
  for (const auto& dots : sel_target.dots) terms.target_side.push_back(penalty_value(dots, variant));
  for (const auto& dots : sel_source.dots) terms.source_side.push_back(penalty_value(dots, variant));
  return terms;
}

double rcsls_objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x_n,
                       const Eigen::MatrixXd& y_n, const NeighborPools& pools, int k,
                       LossVariant variant, double l2_reg, const RetrievalOptions& opt) {
  check_instance(w, x_n, y_n, pools, k);
  const Eigen::MatrixXd mapped_x = x_n * w.transpose();
  const PenaltyTerms terms = rcsls_penalty_terms(w, x_n, y_n, pools, k, variant, opt);

  const double scale = variant == LossVariant::Linear ? 1.0 / static_cast<double>(k) : 1.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x_n.rows(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    acc += -2.0 * mapped_x.row(i).dot(y_n.row(i)) +
           scale * terms.target_side[ui] + scale * terms.source_side[ui];
  }
  return acc / static_cast<double>(x_n.rows()) + l2_reg * w.squaredNorm();
}

Eigen::MatrixXd rcsls_subgradient(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x_n,
                                  const Eigen::MatrixXd& y_n, const NeighborPools& pools,
                                  int k, LossVariant variant, double l2_reg,
                                  const RetrievalOptions& opt) {
  check_instance(w, x_n, y_n, pools, k);
  const Eigen::MatrixXd mapped_x = x_n * w.transpose();
  const Eigen::MatrixXd mapped_pool = pools.source_pool * w.transpose();
  const auto sel_target = select_neighbors(mapped_x, pools.target_pool, k, opt);
  const auto sel_source = select_neighbors(y_n, mapped_pool, k, opt);

  // Selection uses mapped dots; the gradient pieces use the raw pool rows.
  const Eigen::MatrixXd agg_target = aggregate_rows(sel_target, pools.target_pool, variant);
  const Eigen::MatrixXd agg_source = aggregate_rows(sel_source, pools.source_pool, variant);

  const double scale = variant == LossVariant::Linear ? 1.0 / static_cast<double>(k) : 1.0;
  Eigen::MatrixXd g = -2.0 * (y_n.transpose() * x_n);
  g.noalias() += scale * (agg_target.transpose() * x_n);
  g.noalias() += scale * (y_n.transpose() * agg_source);
  g /= static_cast<double>(x_n.rows());
  if (l2_reg != 0.0) g += 2.0 * l2_reg * w;
  return g;
}

Eigen::MatrixXd project_spectral(const Eigen::MatrixXd& m, bool* clamped) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd sigma = svd.singularValues();
  bool any = false;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > 1.0) {
      sigma(i) = 1.0;
      any = true;
    }
  }
  if (clamped != nullptr) *clamped = any;
  if (!any) return m;
  return svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
}

std::pair<MappingMatrix, TrainTrace> train_rcsls(const EmbeddingMatrix& src,
                                                 const EmbeddingMatrix& tgt,
                                                 const BilingualLexicon& lex,
                                                 const NeighborPools& pools,
                                                 const TrainConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  if (lex.pairs.empty()) throw std::invalid_argument("train: empty lexicon");
  if (src.dim() != tgt.dim()) throw std::invalid_argument("train: dimension mismatch");

  const auto n = static_cast<Eigen::Index>(lex.pairs.size());
  Eigen::MatrixXd x_n(n, src.dim());
  Eigen::MatrixXd y_n(n, tgt.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [a, b] = lex.pairs[static_cast<std::size_t>(i)];
    x_n.row(i) = src.vectors.row(a);
    y_n.row(i) = tgt.vectors.row(b);
  }
  if (config.batch_size > n) throw std::invalid_argument("train: batch_size exceeds pair count");

  const int epochs = config.epochs_grid.front();
  double lr = config.learning_rates.front();
  const Eigen::Index batch = config.batch_size == 0 ? n : config.batch_size;
  const bool full_batch = batch == n;
  const bool spectral = config.constraint == ConstraintDomain::SpectralBall;
  RetrievalOptions opt;
  opt.threads = config.threads;

  Eigen::MatrixXd w = procrustes_fit(x_n, y_n).w;

  TrainTrace trace;
  trace.batch_size_used = batch;
  trace.initial_objective = rcsls_objective(w, x_n, y_n, pools, config.k,
                                            config.loss_variant, config.l2_reg, opt);
  double best_f = trace.initial_objective;
  Eigen::MatrixXd best_w = w;

  detail::SplitMix64 rng(config.seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});

  const auto take_step = [&](const Eigen::MatrixXd& xb, const Eigen::MatrixXd& yb) {
    const Eigen::MatrixXd g = rcsls_subgradient(w, xb, yb, pools, config.k,
                                                config.loss_variant, config.l2_reg, opt);
    w -= lr * g;
    if (spectral) {
      bool clamped = false;
      w = project_spectral(w, &clamped);
      if (clamped) ++trace.projections_clamped;
    }
  };

  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (lr > 0.0) {
      if (full_batch) {
        take_step(x_n, y_n);
      } else {
        detail::seeded_shuffle(perm, rng);
        for (Eigen::Index s = 0; s < n; s += batch) {
          const Eigen::Index bn = std::min(batch, n - s);
          Eigen::MatrixXd xb(bn, x_n.cols());
          Eigen::MatrixXd yb(bn, y_n.cols());
          for (Eigen::Index r = 0; r < bn; ++r) {
            xb.row(r) = x_n.row(perm[static_cast<std::size_t>(s + r)]);
            yb.row(r) = y_n.row(perm[static_cast<std::size_t>(s + r)]);
          }
          take_step(xb, yb);
        }
      }
    }

    const double f = rcsls_objective(w, x_n, y_n, pools, config.k,
                                     config.loss_variant, config.l2_reg, opt);
    trace.objective_history.push_back(f);
    trace.lr_history.push_back(lr);
    if (f < best_f) {
      best_f = f;
      best_w = w;
    } else if (config.lr_halving) {
      lr /= 2.0;
      w = best_w;
    }
  }

  trace.best_objective = best_f;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {MappingMatrix{std::move(best_w), config.constraint}, std::move(trace)};
}

GridSearchResult grid_search(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                             const BilingualLexicon& train_lex,
                             const BilingualLexicon& valid_lex, const TrainConfig& config) {
  config.validate();
  if (valid_lex.pairs.empty()) throw std::invalid_argument("grid search: empty validation lexicon");

  const NeighborPools pools = build_neighbor_pools(src, tgt, train_lex,
                                                   config.extended_normalization,
                                                   config.pool_cap);
  RetrievalOptions opt;
  opt.threads = config.threads;

  GridSearchResult best;
  bool have_best = false;
  double best_lr = 0.0;
  int best_epochs = 0;

  for (double lr : config.learning_rates) {
    for (int epochs : config.epochs_grid) {
      TrainConfig point = config;
      point.learning_rates = {lr};
      point.epochs_grid = {epochs};

      auto [mapping, trace] = train_rcsls(src, tgt, train_lex, pools, point);
      const EvalReport report =
          evaluate_mapping(mapping, src, tgt, valid_lex, Criterion::Csls, config.k, opt);

      const bool wins =
          !have_best || report.accuracy > best.valid_accuracy ||
          (report.accuracy == best.valid_accuracy &&
           (lr < best_lr || (lr == best_lr && epochs < best_epochs)));
      if (wins) {
        best.best_config = std::move(point);
        best.mapping = std::move(mapping);
        best.trace = std::move(trace);
        best.valid_accuracy = report.accuracy;
        best_lr = lr;
        best_epochs = epochs;
        have_best = true;
      }
    }
  }
  return best;
}

}  // namespace lexalign
