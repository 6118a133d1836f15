#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lexalign {

/// Ordered word list with a word -> row-index lookup. Indices are dense,
/// 0-based, and follow insertion order.
class Vocabulary {
 public:
  Eigen::Index size() const { return static_cast<Eigen::Index>(words_.size()); }
  const std::string& word(Eigen::Index i) const { return words_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& words() const { return words_; }

  std::optional<Eigen::Index> find(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  /// Appends a word. Returns its index, or nullopt if the word is already present.
  std::optional<Eigen::Index> add(std::string word);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

enum class NormState { Raw, L2Normalized, CenteredL2Normalized };

/// A vocabulary plus its N x d vector matrix. Immutable after construction;
/// safe to share read-only across threads.
struct EmbeddingMatrix {
  Vocabulary vocab;
  Eigen::MatrixXd vectors;  // N x d, one row per word
  NormState norm_state = NormState::Raw;
  // Rows whose norm fell below tolerance at normalization time. They are kept
  // as all-zero rows and excluded from retrieval candidate sets.
  std::unordered_set<Eigen::Index> zero_rows;

  Eigen::Index rows() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

/// Reads the standard text vector format: a "N d" header line, then one
/// "word v1 ... vd" line per word. Words are byte strings; duplicates after
/// the first occurrence are skipped with a warning and do not count toward
/// max_vocab. max_vocab = 0 means unlimited.
EmbeddingMatrix load_text_embeddings(const std::filesystem::path& path,
                                     Eigen::Index max_vocab = 0);

/// Divides every row by its Euclidean norm. Rows with norm below 1e-12 are
/// set to zero and recorded in zero_rows. Requires norm_state == Raw.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& emb);

/// Subtracts the per-dimension mean over all rows, then l2-normalizes.
/// Requires norm_state == Raw.
EmbeddingMatrix center_then_normalize(const EmbeddingMatrix& emb);

/// Writes the text vector format with `precision` significant digits.
void save_text_embeddings(const EmbeddingMatrix& emb,
                          const std::filesystem::path& path,
                          int precision = 6);

}  // namespace lexalign
