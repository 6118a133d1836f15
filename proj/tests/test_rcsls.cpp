#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lexalign/rcsls.hpp"

#include "lexalign/evaluation.hpp"

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using lexalign::ConstraintDomain;
using lexalign::LossVariant;
using lexalign::NeighborPools;
using lexalign::TrainConfig;

namespace {

struct Instance {
  Eigen::MatrixXd x_n, y_n, w;
  NeighborPools pools;
};

Instance random_instance(Eigen::Index n, Eigen::Index pool_t, Eigen::Index pool_s,
                         Eigen::Index d, std::uint64_t seed) {
  Instance inst;
  inst.x_n = testsupport::random_gaussian(n, d, seed);
  inst.y_n = testsupport::random_gaussian(n, d, seed + 1);
  testsupport::normalize_rows(inst.x_n);
  testsupport::normalize_rows(inst.y_n);
  inst.pools.target_pool = testsupport::random_gaussian(pool_t, d, seed + 2);
  inst.pools.source_pool = testsupport::random_gaussian(pool_s, d, seed + 3);
  testsupport::normalize_rows(inst.pools.target_pool);
  testsupport::normalize_rows(inst.pools.source_pool);
  inst.w = testsupport::random_orthogonal(d, seed + 4) +
           0.1 * testsupport::random_gaussian(d, d, seed + 5);
  return inst;
}

// Dot lists in ascending candidate index order, computed through the same
// batched kernel (and thus bit-identical to what the penalty selection saw).
std::vector<std::vector<double>> all_dots_ascending(const Eigen::MatrixXd& queries,
                                                    const Eigen::MatrixXd& pool) {
  auto lists = lexalign::top_k_dots(queries, pool, static_cast<int>(pool.rows()));
  std::vector<std::vector<double>> out(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    std::sort(lists[i].begin(), lists[i].end(),
              [](const lexalign::ScoredIndex& a, const lexalign::ScoredIndex& b) {
                return a.index < b.index;
              });
    for (const auto& entry : lists[i]) out[i].push_back(entry.score);
  }
  return out;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace

TEST_CASE("objective vanishes for a perfectly aligned pair") {
  Eigen::MatrixXd v = testsupport::random_gaussian(1, 4, 301);
  testsupport::normalize_rows(v);
  NeighborPools pools;
  pools.target_pool = v;
  pools.source_pool = v;
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(4, 4);
  const double f = lexalign::rcsls_objective(w, v, v, pools, 1);
  CHECK(std::abs(f) <= 1e-12);
}

TEST_CASE("objective at the zero map is exactly zero") {
  const auto inst = random_instance(5, 8, 8, 4, 310);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
  CHECK(lexalign::rcsls_objective(zero, inst.x_n, inst.y_n, inst.pools, 2) == 0.0);
  CHECK(lexalign::rcsls_objective(zero, inst.x_n, inst.y_n, inst.pools, 2,
                                  LossVariant::Linear, 0.3) == 0.0);
}

TEST_CASE("objective matches the loop-and-sort reference") {
  const auto inst = random_instance(6, 10, 9, 4, 320);
  for (int k : {1, 2, 3}) {
    for (const auto variant : {LossVariant::Linear, LossVariant::LogSumExp}) {
      for (double l2 : {0.0, 0.05}) {
        const double f = lexalign::rcsls_objective(inst.w, inst.x_n, inst.y_n,
                                                   inst.pools, k, variant, l2);
        const double expect = testsupport::oracle_rcsls_objective(
            inst.w, inst.x_n, inst.y_n, inst.pools.target_pool, inst.pools.source_pool,
            k, variant == LossVariant::LogSumExp, l2);
        CHECK(std::abs(f - expect) <= 1e-12);
      }
    }
  }
}

TEST_CASE("linear penalties equal the exhaustive subset maximum bit for bit") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pool_t = static_cast<Eigen::Index>(1 + seed % 8);
    const auto pool_s = static_cast<Eigen::Index>(1 + (seed * 5) % 8);
    const auto inst = random_instance(3, pool_t, pool_s, 4, 330 + seed * 7);
    const int max_k = static_cast<int>(std::min<Eigen::Index>({pool_t, pool_s, 3}));
    const int kk = 1 + static_cast<int>(seed) % max_k;

    const auto terms = lexalign::rcsls_penalty_terms(inst.w, inst.x_n, inst.y_n,
                                                     inst.pools, kk);
    const Eigen::MatrixXd mapped_x = inst.x_n * inst.w.transpose();
    const Eigen::MatrixXd mapped_pool = inst.pools.source_pool * inst.w.transpose();
    const auto target_dots = all_dots_ascending(mapped_x, inst.pools.target_pool);
    const auto source_dots = all_dots_ascending(inst.y_n, mapped_pool);

    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(terms.target_side[i] == lexalign::subset_max_oracle(target_dots[i], kk));
      CHECK(terms.source_side[i] == lexalign::subset_max_oracle(source_dots[i], kk));
    }
  }
}

TEST_CASE("objective is midpoint convex") {
  const auto inst = random_instance(6, 10, 9, 5, 350);
  for (const auto variant : {LossVariant::Linear, LossVariant::LogSumExp}) {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const Eigen::MatrixXd w1 = testsupport::random_gaussian(5, 5, 400 + 2 * s);
      const Eigen::MatrixXd w2 = testsupport::random_gaussian(5, 5, 401 + 2 * s);
      const double f1 =
          lexalign::rcsls_objective(w1, inst.x_n, inst.y_n, inst.pools, 3, variant);
      const double f2 =
          lexalign::rcsls_objective(w2, inst.x_n, inst.y_n, inst.pools, 3, variant);
      const double fm = lexalign::rcsls_objective(0.5 * (w1 + w2), inst.x_n, inst.y_n,
                                                  inst.pools, 3, variant);
      CHECK(fm <= 0.5 * (f1 + f2) + 1e-9);
    }
  }
}

TEST_CASE("subgradient vanishes for a perfectly aligned pair") {
  Eigen::MatrixXd v = testsupport::random_gaussian(1, 4, 360);
  testsupport::normalize_rows(v);
  NeighborPools pools;
  pools.target_pool = v;
  pools.source_pool = v;
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd g = lexalign::rcsls_subgradient(w, v, v, pools, 1);
  CHECK((g.array() == 0.0).all());
}

TEST_CASE("doubling the target side doubles the subgradient exactly") {
  const auto inst = random_instance(5, 8, 8, 4, 370);
  const Eigen::MatrixXd g1 =
      lexalign::rcsls_subgradient(inst.w, inst.x_n, inst.y_n, inst.pools, 2);

  NeighborPools doubled = inst.pools;
  doubled.target_pool *= 2.0;
  const Eigen::MatrixXd g2 = lexalign::rcsls_subgradient(
      inst.w, inst.x_n, 2.0 * inst.y_n, doubled, 2);
  CHECK((g2.array() == (2.0 * g1).array()).all());
}

TEST_CASE("subgradient matches central differences where the objective is smooth") {
  // Find a W where every pair's k-th and (k+1)-th neighbor dots are clearly
  // separated; the objective is affine (plus the quadratic ridge) in a
  // neighborhood, so central differences are exact up to roundoff.
  const int k = 2;
  const double l2 = 0.03;
  Instance inst;
  bool smooth = false;
  for (std::uint64_t seed = 380; seed < 440 && !smooth; ++seed) {
    inst = random_instance(5, 8, 8, 4, seed);
    smooth = true;
    const Eigen::MatrixXd mapped_x = inst.x_n * inst.w.transpose();
    const Eigen::MatrixXd mapped_pool = inst.pools.source_pool * inst.w.transpose();
    for (const auto& dots_list :
         {all_dots_ascending(mapped_x, inst.pools.target_pool),
          all_dots_ascending(inst.y_n, mapped_pool)}) {
      for (auto dots : dots_list) {
        std::sort(dots.begin(), dots.end(), std::greater<double>());
        const auto uk = static_cast<std::size_t>(k);
        if (dots[uk - 1] - dots[uk] <= 1e-5) smooth = false;
      }
    }
  }
  REQUIRE(smooth);

  for (const auto variant : {LossVariant::Linear, LossVariant::LogSumExp}) {
    const Eigen::MatrixXd g = lexalign::rcsls_subgradient(
        inst.w, inst.x_n, inst.y_n, inst.pools, k, variant, l2);
    const double h = 1e-6;
    for (Eigen::Index r = 0; r < 4; ++r) {
      for (Eigen::Index c = 0; c < 4; ++c) {
        Eigen::MatrixXd wp = inst.w, wm = inst.w;
        wp(r, c) += h;
        wm(r, c) -= h;
        const double fp = lexalign::rcsls_objective(wp, inst.x_n, inst.y_n,
                                                    inst.pools, k, variant, l2);
        const double fm = lexalign::rcsls_objective(wm, inst.x_n, inst.y_n,
                                                    inst.pools, k, variant, l2);
        const double fd = (fp - fm) / (2.0 * h);
        CHECK(std::abs(fd - g(r, c)) <= 1e-4 * std::max(std::abs(g(r, c)), 1e-4));
      }
    }
  }
}

TEST_CASE("every subgradient supports the objective from below") {
  const auto inst = random_instance(6, 9, 8, 4, 450);
  for (const auto variant : {LossVariant::Linear, LossVariant::LogSumExp}) {
    for (double l2 : {0.0, 0.07}) {
      for (std::uint64_t s = 0; s < 25; ++s) {
        const Eigen::MatrixXd wa = testsupport::random_gaussian(4, 4, 500 + 2 * s);
        const Eigen::MatrixXd wb = testsupport::random_gaussian(4, 4, 501 + 2 * s);
        const double fa = lexalign::rcsls_objective(wa, inst.x_n, inst.y_n,
                                                    inst.pools, 3, variant, l2);
        const double fb = lexalign::rcsls_objective(wb, inst.x_n, inst.y_n,
                                                    inst.pools, 3, variant, l2);
        const Eigen::MatrixXd g = lexalign::rcsls_subgradient(
            wa, inst.x_n, inst.y_n, inst.pools, 3, variant, l2);
        const double linearized = fa + (g.array() * (wb - wa).array()).sum();
        CHECK(fb >= linearized - 1e-9);
      }
    }
  }
}

TEST_CASE("log-sum-exp penalties bracket the top dot") {
  const auto inst = random_instance(6, 10, 9, 4, 520);
  const int k = 3;
  const auto lse = lexalign::rcsls_penalty_terms(inst.w, inst.x_n, inst.y_n, inst.pools,
                                                 k, LossVariant::LogSumExp);
  const Eigen::MatrixXd mapped_x = inst.x_n * inst.w.transpose();
  const auto top = lexalign::top_k_dots(mapped_x, inst.pools.target_pool, k);
  for (std::size_t i = 0; i < 6; ++i) {
    const double max_dot = top[i][0].score;
    CHECK(lse.target_side[i] >= max_dot - 1e-12);
    CHECK(lse.target_side[i] <= max_dot + std::log(static_cast<double>(k)) + 1e-12);
  }

  const double f_lin = lexalign::rcsls_objective(inst.w, inst.x_n, inst.y_n, inst.pools,
                                                 k, LossVariant::Linear);
  const double f_lse = lexalign::rcsls_objective(inst.w, inst.x_n, inst.y_n, inst.pools,
                                                 k, LossVariant::LogSumExp);
  CHECK(f_lse >= f_lin - 1e-12);
}

TEST_CASE("instance validation") {
  const auto inst = random_instance(4, 6, 6, 3, 530);
  CHECK_THROWS_AS(lexalign::rcsls_objective(inst.w, inst.x_n, inst.y_n.topRows(2),
                                            inst.pools, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(lexalign::rcsls_objective(Eigen::MatrixXd::Identity(4, 4), inst.x_n,
                                            inst.y_n, inst.pools, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      lexalign::rcsls_objective(inst.w, inst.x_n, inst.y_n, inst.pools, 7),
      std::invalid_argument);
  CHECK_THROWS_AS(
      lexalign::rcsls_objective(inst.w, inst.x_n, inst.y_n, inst.pools, 0),
      std::invalid_argument);
}

TEST_CASE("spectral projection clamps only the overlong axes") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 0.5;
  bool clamped = false;
  const Eigen::MatrixXd p = lexalign::project_spectral(m, &clamped);
  CHECK(clamped);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 2);
  expect(0, 0) = 1.0;
  expect(1, 1) = 0.5;
  CHECK((p - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("spectral projection leaves feasible points untouched") {
  const Eigen::MatrixXd q = testsupport::random_orthogonal(5, 540);
  bool clamped = true;
  const Eigen::MatrixXd p = lexalign::project_spectral(0.99 * q, &clamped);
  CHECK(!clamped);
  CHECK((p.array() == (0.99 * q).array()).all());
}

TEST_CASE("spectral projection lands inside the ball and is idempotent") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::MatrixXd m = 2.0 * testsupport::random_gaussian(5, 5, 550 + s);
    const Eigen::MatrixXd p = lexalign::project_spectral(m);
    CHECK(spectral_norm(p) <= 1.0 + 1e-9);
    const Eigen::MatrixXd pp = lexalign::project_spectral(p);
    CHECK((pp - p).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("spectral projection is the nearest feasible point") {
  const Eigen::MatrixXd m = 1.5 * testsupport::random_gaussian(4, 4, 570);
  const Eigen::MatrixXd p = lexalign::project_spectral(m);
  const double dist = (m - p).norm();
  for (std::uint64_t s = 0; s < 100; ++s) {
    // Feasible by construction: orthogonal factors around shrunken axes.
    const Eigen::MatrixXd u = testsupport::random_orthogonal(4, 600 + 2 * s);
    const Eigen::MatrixXd v = testsupport::random_orthogonal(4, 601 + 2 * s);
    Eigen::VectorXd sing = testsupport::random_gaussian(4, 1, 800 + s).cwiseAbs();
    for (Eigen::Index i = 0; i < 4; ++i) sing(i) = std::min(sing(i), 1.0);
    const Eigen::MatrixXd b = u * sing.asDiagonal() * v.transpose();
    CHECK(dist <= (m - b).norm() + 1e-9);
  }
}

TEST_CASE("spectral projection shrinks distances") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::MatrixXd a = 1.8 * testsupport::random_gaussian(4, 4, 900 + 2 * s);
    const Eigen::MatrixXd b = 1.8 * testsupport::random_gaussian(4, 4, 901 + 2 * s);
    const double before = (a - b).norm();
    const double after =
        (lexalign::project_spectral(a) - lexalign::project_spectral(b)).norm();
    CHECK(after <= before + 1e-9);
  }
}

TEST_CASE("training on a planted rotation reaches perfect retrieval") {
  const auto fx = testsupport::planted_rotation(200, 16, 0.0, 1000, 150);
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  TrainConfig config;
  config.learning_rates = {10.0};
  config.epochs_grid = {8};
  config.k = 5;
  const auto [mapping, trace] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);

  CHECK(trace.objective_history.size() == 8);
  CHECK(trace.lr_history.size() == 8);
  CHECK(trace.best_objective <= trace.initial_objective + 1e-9);
  CHECK(trace.batch_size_used == 150);

  for (const auto criterion : {lexalign::Criterion::Nn, lexalign::Criterion::Csls}) {
    const auto report =
        lexalign::evaluate_mapping(mapping, fx.src, fx.tgt, fx.held_out, criterion, 5);
    CHECK(report.accuracy == 1.0);
  }
}

TEST_CASE("spectral-ball training stays inside the ball") {
  const auto fx = testsupport::planted_rotation(120, 8, 0.1, 1010, 120);
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  TrainConfig config;
  config.learning_rates = {25.0};
  config.epochs_grid = {5};
  config.k = 4;
  config.constraint = ConstraintDomain::SpectralBall;
  const auto [mapping, trace] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);
  CHECK(spectral_norm(mapping.w) <= 1.0 + 1e-6);
  CHECK(mapping.constraint == ConstraintDomain::SpectralBall);
  CHECK(trace.best_objective <= trace.initial_objective + 1e-9);
}

TEST_CASE("zero learning rate freezes the warm start") {
  const auto fx = testsupport::planted_rotation(80, 6, 0.2, 1020, 80);
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  TrainConfig config;
  config.learning_rates = {0.0};
  config.epochs_grid = {3};
  config.k = 3;
  const auto [mapping, trace] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);

  const auto warm = lexalign::procrustes_fit(fx.src.vectors, fx.tgt.vectors);
  CHECK((mapping.w.array() == warm.w.array()).all());
  for (double f : trace.objective_history) CHECK(f == trace.initial_objective);
  CHECK(trace.best_objective == trace.initial_objective);
}

TEST_CASE("mini-batch training is reproducible and seed-sensitive") {
  const auto fx = testsupport::planted_rotation(100, 8, 0.05, 1030, 100);
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  TrainConfig config;
  config.learning_rates = {5.0};
  config.epochs_grid = {3};
  config.k = 4;
  config.batch_size = 32;
  config.seed = 7;

  const auto [m1, t1] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);
  const auto [m2, t2] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);
  CHECK((m1.w.array() == m2.w.array()).all());
  CHECK(t1.objective_history == t2.objective_history);
  CHECK(t1.batch_size_used == 32);

  TrainConfig other = config;
  other.seed = 8;
  const auto [m3, t3] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, other);
  CHECK(t1.objective_history != t3.objective_history);
}

TEST_CASE("halving reverts to the best iterate after a failed step") {
  const auto fx = testsupport::planted_rotation(60, 6, 0.3, 1040, 60);
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  TrainConfig config;
  config.learning_rates = {1000.0};  // guaranteed overshoot
  config.epochs_grid = {6};
  config.k = 3;
  const auto [mapping, trace] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);

  for (std::size_t e = 1; e < trace.lr_history.size(); ++e) {
    CHECK(trace.lr_history[e] <= trace.lr_history[e - 1]);
  }
  CHECK(std::any_of(trace.lr_history.begin(), trace.lr_history.end(),
                    [](double lr) { return lr < 1000.0; }));
  const double hist_min =
      *std::min_element(trace.objective_history.begin(), trace.objective_history.end());
  CHECK(trace.best_objective == std::min(trace.initial_objective, hist_min));

  // Identity pairs make the seed pools coincide with the pair rows, so the
  // returned map must reproduce its recorded objective.
  const double recomputed = lexalign::rcsls_objective(
      mapping.w, pools.source_pool, pools.target_pool, pools, config.k);
  CHECK(std::abs(recomputed - trace.best_objective) <= 1e-12);
}

TEST_CASE("configuration validation catches unusable settings") {
  const auto check_throws = [](auto mutate) {
    TrainConfig config;
    mutate(config);
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  };
  check_throws([](TrainConfig& c) { c.learning_rates.clear(); });
  check_throws([](TrainConfig& c) { c.epochs_grid.clear(); });
  check_throws([](TrainConfig& c) { c.learning_rates = {-1.0}; });
  check_throws([](TrainConfig& c) { c.epochs_grid = {0}; });
  check_throws([](TrainConfig& c) { c.k = 0; });
  check_throws([](TrainConfig& c) { c.constraint = ConstraintDomain::Orthogonal; });
  check_throws([](TrainConfig& c) { c.l2_reg = -0.1; });
  check_throws([](TrainConfig& c) { c.batch_size = -1; });
  check_throws([](TrainConfig& c) { c.threads = -2; });
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("oversized batches are rejected") {
  const auto fx = testsupport::planted_rotation(30, 5, 0.0, 1050, 30);
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  TrainConfig config;
  config.batch_size = 31;
  CHECK_THROWS_AS(lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config),
                  std::invalid_argument);
}

TEST_CASE("seed pools mirror the pair rows, extended pools the vocabulary head") {
  const auto fx = testsupport::planted_rotation(40, 5, 0.0, 1060, 25);
  std::vector<lexalign::BilingualLexicon::Pair> pairs = fx.train.pairs;
  pairs.push_back(pairs.front());  // a repeated pair must stay duplicated
  const auto lex = lexalign::make_lexicon(pairs, 40, 40);

  const auto seeded = lexalign::build_neighbor_pools(fx.src, fx.tgt, lex, false);
  REQUIRE(seeded.source_size() == 26);
  CHECK((seeded.source_pool.row(25).array() == seeded.source_pool.row(0).array()).all());
  for (Eigen::Index i = 0; i < 25; ++i) {
    CHECK((seeded.source_pool.row(i).array() == fx.src.vectors.row(i).array()).all());
    CHECK((seeded.target_pool.row(i).array() == fx.tgt.vectors.row(i).array()).all());
  }

  const auto full = lexalign::build_neighbor_pools(fx.src, fx.tgt, lex, true);
  CHECK(full.source_size() == 40);
  CHECK(full.target_size() == 40);
  const auto capped = lexalign::build_neighbor_pools(fx.src, fx.tgt, lex, true, 7);
  CHECK(capped.source_size() == 7);
  CHECK((capped.target_pool.array() == fx.tgt.vectors.topRows(7).array()).all());
}

TEST_CASE("grid search with one point reduces to plain training") {
  const auto fx = testsupport::planted_rotation(80, 8, 0.1, 1070, 60);
  TrainConfig config;
  config.learning_rates = {10.0};
  config.epochs_grid = {4};
  config.k = 4;
  const auto result = lexalign::grid_search(fx.src, fx.tgt, fx.train, fx.held_out, config);

  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  const auto [mapping, trace] = lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, config);
  CHECK((result.mapping.w.array() == mapping.w.array()).all());
  CHECK(result.best_config.learning_rates == std::vector<double>{10.0});
  CHECK(result.best_config.epochs_grid == std::vector<int>{4});

  const auto report = lexalign::evaluate_mapping(mapping, fx.src, fx.tgt, fx.held_out,
                                                 lexalign::Criterion::Csls, 4);
  CHECK(result.valid_accuracy == report.accuracy);
}

TEST_CASE("grid search ties prefer the smaller learning rate and epoch count") {
  // Noiseless planted data: every grid point reaches perfect validation
  // accuracy, so the tie-break alone decides.
  const auto fx = testsupport::planted_rotation(80, 10, 0.0, 1080, 60);
  TrainConfig config;
  config.learning_rates = {10.0, 5.0};
  config.epochs_grid = {4, 2};
  config.k = 4;
  const auto result = lexalign::grid_search(fx.src, fx.tgt, fx.train, fx.held_out, config);
  CHECK(result.valid_accuracy == 1.0);
  CHECK(result.best_config.learning_rates == std::vector<double>{5.0});
  CHECK(result.best_config.epochs_grid == std::vector<int>{2});
}

TEST_CASE("grid search picks the measurably better point") {
  const auto fx = testsupport::planted_rotation(200, 16, 0.25, 1090, 150);
  TrainConfig config;
  config.learning_rates = {0.0, 25.0};
  config.epochs_grid = {6};
  config.k = 5;
  const auto result = lexalign::grid_search(fx.src, fx.tgt, fx.train, fx.held_out, config);

  // Score both points independently; the winner must match the comparator.
  const auto pools = lexalign::build_neighbor_pools(fx.src, fx.tgt, fx.train, false);
  double acc[2];
  const double lrs[2] = {0.0, 25.0};
  for (int i = 0; i < 2; ++i) {
    TrainConfig point = config;
    point.learning_rates = {lrs[i]};
    const auto [mapping, trace] =
        lexalign::train_rcsls(fx.src, fx.tgt, fx.train, pools, point);
    acc[i] = lexalign::evaluate_mapping(mapping, fx.src, fx.tgt, fx.held_out,
                                        lexalign::Criterion::Csls, 5)
                 .accuracy;
  }
  const double expect_lr = acc[1] > acc[0] ? 25.0 : 0.0;
  CHECK(result.best_config.learning_rates == std::vector<double>{expect_lr});
  CHECK(result.valid_accuracy == std::max(acc[0], acc[1]));
}

TEST_CASE("grid search requires a validation lexicon") {
  const auto fx = testsupport::planted_rotation(30, 5, 0.0, 1100, 30);
  TrainConfig config;
  lexalign::BilingualLexicon empty;
  CHECK_THROWS_AS(lexalign::grid_search(fx.src, fx.tgt, fx.train, empty, config),
                  std::invalid_argument);
}
