#include "lexalign/retrieval.hpp"

#include "detail/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lexalign {

namespace {

constexpr double kZeroNormTol = 1e-12;
constexpr Eigen::Index kQueryChunk = 256;

struct HeapEntry {
  double dot;
  Eigen::Index index;
};

// Strictly higher dot wins; equal dots go to the lower candidate index.
inline bool better(const HeapEntry& a, const HeapEntry& b) {
  return a.dot > b.dot || (a.dot == b.dot && a.index < b.index);
}

struct WorstAtTop {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const { return better(a, b); }
};

std::vector<char> exclusion_mask(Eigen::Index n,
                                 const std::unordered_set<Eigen::Index>& exclude) {
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  for (Eigen::Index idx : exclude) {
    if (idx >= 0 && idx < n) mask[static_cast<std::size_t>(idx)] = 1;
  }
  return mask;
}

Eigen::Index usable_candidates(const std::vector<char>& mask) {
  return static_cast<Eigen::Index>(mask.size()) -
         static_cast<Eigen::Index>(std::count(mask.begin(), mask.end(), char(1)));
}

// Shared scan: for each query row, visit candidates in ascending index order
// in blocks, handing each (query, candidate, dot) to the visitor. Dots for a
// pair are always computed over the full width, so block boundaries cannot
// change any value.
template <typename Visit>
void scan_dots(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& candidates,
               const std::vector<char>& mask, const RetrievalOptions& opt,
               const Visit& visit) {
  const Eigen::Index m = queries.rows();
  const Eigen::Index p = candidates.rows();
  const Eigen::Index block = std::max<Eigen::Index>(1, opt.block);

  Eigen::MatrixXf queries_f, candidates_f;
  if (opt.fp32_scores) {
    queries_f = queries.cast<float>();
    candidates_f = candidates.cast<float>();
  }

  detail::parallel_chunks(m, kQueryChunk, opt.threads, [&](Eigen::Index q0, Eigen::Index q1) {
    const Eigen::Index qn = q1 - q0;
    Eigen::MatrixXd dots(qn, block);
    Eigen::MatrixXf dots_f;
    if (opt.fp32_scores) dots_f.resize(qn, block);

    for (Eigen::Index c0 = 0; c0 < p; c0 += block) {
      const Eigen::Index cn = std::min(block, p - c0);
      if (opt.fp32_scores) {
        dots_f.leftCols(cn).noalias() =
            queries_f.middleRows(q0, qn) * candidates_f.middleRows(c0, cn).transpose();
      } else {
        dots.leftCols(cn).noalias() =
            queries.middleRows(q0, qn) * candidates.middleRows(c0, cn).transpose();
      }
      for (Eigen::Index q = 0; q < qn; ++q) {
        for (Eigen::Index c = 0; c < cn; ++c) {
          const Eigen::Index cand = c0 + c;
          if (mask[static_cast<std::size_t>(cand)]) continue;
          const double dot = opt.fp32_scores ? static_cast<double>(dots_f(q, c))
                                             : dots(q, c);
          visit(q0 + q, cand, dot);
        }
      }
    }
  });
}

}  // namespace

const char* to_string(Criterion c) {
  return c == Criterion::Nn ? "nn" : "csls";
}

std::vector<std::vector<ScoredIndex>> top_k_dots(
    const Eigen::MatrixXd& queries, const Eigen::MatrixXd& candidates, int k,
    const std::unordered_set<Eigen::Index>& exclude, const RetrievalOptions& opt) {
  if (queries.cols() != candidates.cols()) {
    throw std::invalid_argument("top_k_dots: dimension mismatch");
  }
  const auto mask = exclusion_mask(candidates.rows(), exclude);
  if (k < 1 || k > usable_candidates(mask)) {
    throw std::invalid_argument("top_k_dots: k out of range");
  }

  const Eigen::Index m = queries.rows();
  std::vector<std::vector<HeapEntry>> heaps(static_cast<std::size_t>(m));
  scan_dots(queries, candidates, mask, opt,
            [&](Eigen::Index q, Eigen::Index cand, double dot) {
              auto& heap = heaps[static_cast<std::size_t>(q)];
              const HeapEntry entry{dot, cand};
              if (heap.size() < static_cast<std::size_t>(k)) {
                heap.push_back(entry);
                std::push_heap(heap.begin(), heap.end(), WorstAtTop{});
              } else if (better(entry, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), WorstAtTop{});
                heap.back() = entry;
                std::push_heap(heap.begin(), heap.end(), WorstAtTop{});
              }
            });

  std::vector<std::vector<ScoredIndex>> result(static_cast<std::size_t>(m));
  for (Eigen::Index q = 0; q < m; ++q) {
    auto& heap = heaps[static_cast<std::size_t>(q)];
    std::sort(heap.begin(), heap.end(),
              [](const HeapEntry& a, const HeapEntry& b) { return better(a, b); });
    auto& out = result[static_cast<std::size_t>(q)];
    out.reserve(heap.size());
    for (const auto& entry : heap) out.push_back({entry.index, entry.dot});
  }
  return result;
}

std::vector<ScoredIndex> adjusted_argmax(
    const Eigen::MatrixXd& queries, const Eigen::MatrixXd& candidates,
    const std::vector<double>& offsets, const std::unordered_set<Eigen::Index>& exclude,
    const RetrievalOptions& opt) {
  if (queries.cols() != candidates.cols()) {
    throw std::invalid_argument("adjusted_argmax: dimension mismatch");
  }
  if (static_cast<Eigen::Index>(offsets.size()) != candidates.rows()) {
    throw std::invalid_argument("adjusted_argmax: one offset per candidate required");
  }
  const auto mask = exclusion_mask(candidates.rows(), exclude);
  if (usable_candidates(mask) == 0) {
    throw std::invalid_argument("adjusted_argmax: empty candidate set");
  }

  const Eigen::Index m = queries.rows();
  std::vector<HeapEntry> best(static_cast<std::size_t>(m),
                              HeapEntry{-std::numeric_limits<double>::infinity(), -1});
  scan_dots(queries, candidates, mask, opt,
            [&](Eigen::Index q, Eigen::Index cand, double dot) {
              const HeapEntry entry{2.0 * dot - offsets[static_cast<std::size_t>(cand)],
                                    cand};
              auto& incumbent = best[static_cast<std::size_t>(q)];
              if (incumbent.index < 0 || better(entry, incumbent)) incumbent = entry;
            });

  std::vector<ScoredIndex> result(static_cast<std::size_t>(m));
  for (Eigen::Index q = 0; q < m; ++q) {
    result[static_cast<std::size_t>(q)] = {best[static_cast<std::size_t>(q)].index,
                                           best[static_cast<std::size_t>(q)].dot};
  }
  return result;
}

Eigen::MatrixXd map_and_renormalize(const MappingMatrix& w, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd mapped = rows * w.w.transpose();
  for (Eigen::Index i = 0; i < mapped.rows(); ++i) {
    const double norm = mapped.row(i).norm();
    if (norm < kZeroNormTol) {
      mapped.row(i).setZero();
    } else {
      mapped.row(i) /= norm;
    }
  }
  return mapped;
}

TranslationResult nn_translate(const MappingMatrix& w, const Eigen::MatrixXd& queries,
                               const EmbeddingMatrix& target, const RetrievalOptions& opt) {
  const Eigen::MatrixXd mapped = map_and_renormalize(w, queries);
  const auto lists = top_k_dots(mapped, target.vectors, 1, target.zero_rows, opt);

  TranslationResult result;
  result.criterion = Criterion::Nn;
  result.predicted.reserve(lists.size());
  result.scores.reserve(lists.size());
  for (std::size_t q = 0; q < lists.size(); ++q) {
    result.predicted.push_back(lists[q][0].index);
    result.scores.push_back(lists[q][0].score);
    result.query_indices.push_back(static_cast<Eigen::Index>(q));
  }
  return result;
}

NeighborCache mean_knn_similarity(const Eigen::MatrixXd& points,
                                  const Eigen::MatrixXd& pool, int k,
                                  const std::unordered_set<Eigen::Index>& exclude,
                                  const RetrievalOptions& opt) {
  const auto lists = top_k_dots(points, pool, k, exclude, opt);
  NeighborCache cache;
  cache.k = k;
  cache.pool_size = pool.rows();
  cache.r_values.reserve(lists.size());
  for (const auto& list : lists) {
    double sum = 0.0;
    for (const auto& entry : list) sum += entry.score;
    cache.r_values.push_back(sum / static_cast<double>(k));
  }
  return cache;
}

TranslationResult csls_translate(const MappingMatrix& w, const Eigen::MatrixXd& queries,
                                 const EmbeddingMatrix& target,
                                 const EmbeddingMatrix& source_pool, int k,
                                 const RetrievalOptions& opt) {
  if (k < 1) throw std::invalid_argument("csls_translate: k must be positive");
  const Eigen::MatrixXd mapped_queries = map_and_renormalize(w, queries);
  const Eigen::MatrixXd mapped_pool = map_and_renormalize(w, source_pool.vectors);

  const NeighborCache r_query =
      mean_knn_similarity(mapped_queries, target.vectors, k, target.zero_rows, opt);
  const NeighborCache r_target =
      mean_knn_similarity(target.vectors, mapped_pool, k, source_pool.zero_rows, opt);

  const auto best =
      adjusted_argmax(mapped_queries, target.vectors, r_target.r_values,
                      target.zero_rows, opt);

  TranslationResult result;
  result.criterion = Criterion::Csls;
  result.predicted.reserve(best.size());
  result.scores.reserve(best.size());
  for (std::size_t q = 0; q < best.size(); ++q) {
    result.predicted.push_back(best[q].index);
    // csls(Wx, y*) = -2 cos + r_X(y*) + r_Y(Wx) = r_Y(Wx) - (2 cos - r_X(y*))
    result.scores.push_back(r_query.r_values[q] - best[q].score);
    result.query_indices.push_back(static_cast<Eigen::Index>(q));
  }
  return result;
}

double csls_loss(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 const Eigen::MatrixXd& y_pool, const Eigen::MatrixXd& x_pool, int k) {
  const Eigen::MatrixXd xq = x.transpose();
  const Eigen::MatrixXd yq = y.transpose();
  const NeighborCache r_y = mean_knn_similarity(xq, y_pool, k);
  const NeighborCache r_x = mean_knn_similarity(yq, x_pool, k);
  // Summing the neighborhood terms first keeps the loss bitwise symmetric in
  // its two sides; appending them to the dot one by one would not be.
  return (r_y.r_values[0] + r_x.r_values[0]) - 2.0 * x.dot(y);
}

}  // namespace lexalign
