#pragma once

#include "lexalign/embeddings.hpp"
#include "lexalign/lexicon.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline Eigen::MatrixXd random_gaussian(Eigen::Index rows, Eigen::Index cols,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed) {
  const Eigen::MatrixXd g = random_gaussian(d, d, seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

inline void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) /= m.row(i).norm();
}

inline lexalign::EmbeddingMatrix make_embeddings(const std::string& prefix,
                                                 Eigen::MatrixXd vectors) {
  lexalign::EmbeddingMatrix emb;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    emb.vocab.add(prefix + std::to_string(i));
  }
  emb.vectors = std::move(vectors);
  emb.norm_state = lexalign::NormState::L2Normalized;
  return emb;
}

// Unit-norm Gaussian sources, targets rotated by a planted orthogonal map with
// optional additive noise, identity word correspondence. First `train_count`
// pairs form the training lexicon, the rest the held-out one.
struct PlantedFixture {
  lexalign::EmbeddingMatrix src;
  lexalign::EmbeddingMatrix tgt;
  Eigen::MatrixXd rotation;
  lexalign::BilingualLexicon train;
  lexalign::BilingualLexicon held_out;
};

inline PlantedFixture planted_rotation(Eigen::Index n, Eigen::Index d,
                                       double noise_sigma, std::uint64_t seed,
                                       Eigen::Index train_count) {
  PlantedFixture fx;
  Eigen::MatrixXd x = random_gaussian(n, d, seed);
  normalize_rows(x);
  fx.rotation = random_orthogonal(d, seed + 1);
  Eigen::MatrixXd y = x * fx.rotation.transpose();
  if (noise_sigma > 0.0) {
    y += noise_sigma * random_gaussian(n, d, seed + 2);
  }
  normalize_rows(y);

  fx.src = make_embeddings("s", std::move(x));
  fx.tgt = make_embeddings("t", std::move(y));

  std::vector<lexalign::BilingualLexicon::Pair> train_pairs, eval_pairs;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < train_count) {
      train_pairs.push_back({i, i});
    } else {
      eval_pairs.push_back({i, i});
    }
  }
  fx.train = lexalign::make_lexicon(train_pairs, n, n);
  if (!eval_pairs.empty()) fx.held_out = lexalign::make_lexicon(eval_pairs, n, n);
  return fx;
}

// Coordinate-exact hubness construction. Every query shares a strong
// component along the hub axis e0, so plain nearest neighbor always returns
// the hub, while the hub's dense neighborhood makes CSLS prefer the planted
// translations. Anchor words carrying a rotated orthonormal basis sit in both
// vocabularies so that Procrustes on the anchor lexicon is exactly the
// identity; their dots with every query stay far below the decision margins.
//
// With W = I, k = 10: hub dot 0.8 beats the true pair dot 0.75 for every
// query (NN accuracy 0), while CSLS scores the true pair ~0.96 against ~0.78
// for the hub (CSLS accuracy 1).
struct HubFixture {
  lexalign::EmbeddingMatrix src;
  lexalign::EmbeddingMatrix tgt;
  lexalign::BilingualLexicon anchors;  // trains an exactly-identity Procrustes map
  lexalign::BilingualLexicon eval_lex;
  int k = 10;
};

inline HubFixture hub_fixture(std::uint64_t seed = 77) {
  constexpr Eigen::Index kDim = 81;
  constexpr Eigen::Index kQueries = 40;
  const Eigen::MatrixXd basis = random_orthogonal(kDim, seed);

  // Source rows: queries first, then the anchor basis.
  Eigen::MatrixXd src(kQueries + kDim, kDim);
  src.setZero();
  for (Eigen::Index i = 0; i < kQueries; ++i) {
    src(i, 0) = 0.8;
    src(i, 1 + i) = 0.6;
  }
  src.bottomRows(kDim) = basis;

  // Target rows: hub, then translations, then the same anchor basis.
  const double tail = std::sqrt(1.0 - 0.75 * 0.75);
  Eigen::MatrixXd tgt(1 + kQueries + kDim, kDim);
  tgt.setZero();
  tgt(0, 0) = 1.0;
  for (Eigen::Index i = 0; i < kQueries; ++i) {
    tgt.row(1 + i) = 0.75 * src.row(i);
    tgt(1 + i, 41 + i) = tail;
  }
  tgt.bottomRows(kDim) = basis;

  HubFixture fx;
  fx.src = make_embeddings("s", std::move(src));
  fx.tgt = make_embeddings("t", std::move(tgt));

  std::vector<lexalign::BilingualLexicon::Pair> anchor_pairs, eval_pairs;
  for (Eigen::Index j = 0; j < kDim; ++j) {
    anchor_pairs.push_back({kQueries + j, 1 + kQueries + j});
  }
  for (Eigen::Index i = 0; i < kQueries; ++i) {
    eval_pairs.push_back({i, 1 + i});
  }
  fx.anchors = lexalign::make_lexicon(anchor_pairs);
  fx.eval_lex = lexalign::make_lexicon(eval_pairs);
  return fx;
}

}  // namespace testsupport
