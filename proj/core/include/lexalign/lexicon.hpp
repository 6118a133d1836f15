#pragma once

#include "lexalign/embeddings.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace lexalign {

/// Index-resolved (source, target) pairs plus the multi-valued evaluation map.
/// Immutable after construction.
struct BilingualLexicon {
  using Pair = std::pair<Eigen::Index, Eigen::Index>;

  std::vector<Pair> pairs;  // file order, duplicates preserved
  // src index -> set of all its target translations; value sets deduplicated.
  std::map<Eigen::Index, std::set<Eigen::Index>> eval_map;
  double coverage = 0.0;        // fraction of nonempty file lines resolved
  std::size_t skipped_oov = 0;  // well-formed lines dropped for OOV words

  std::size_t size() const { return pairs.size(); }
  std::size_t distinct_sources() const { return eval_map.size(); }
};

/// Builds a lexicon from already-resolved index pairs (eval_map rebuilt).
/// Throws if pairs is empty or an index is out of the given bounds
/// (pass 0 to skip the bound check for that side).
BilingualLexicon make_lexicon(std::vector<BilingualLexicon::Pair> pairs,
                              Eigen::Index n_source = 0, Eigen::Index n_target = 0);

/// Reads a dictionary file: one "src_word tgt_word" pair per line, whitespace
/// separated. Lines with a word missing from either vocabulary are skipped.
/// Throws if no line resolves.
BilingualLexicon load_lexicon(const std::filesystem::path& path,
                              const Vocabulary& src_vocab,
                              const Vocabulary& tgt_vocab);

/// Disjoint train/validation split by distinct source word: all pairs of one
/// source word land on the same side. Seeded shuffle; |valid sources| =
/// round(fraction * distinct sources). Throws if either side would be empty.
std::pair<BilingualLexicon, BilingualLexicon> split_validation(
    const BilingualLexicon& lex, double fraction, std::uint64_t seed);

/// Removes every pair whose source and target words are byte-identical.
/// Throws if all pairs are removed.
BilingualLexicon filter_exact_matches(const BilingualLexicon& lex,
                                      const Vocabulary& src_vocab,
                                      const Vocabulary& tgt_vocab);

}  // namespace lexalign
