#include "lexalign/lexicon.hpp"

#include "detail/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lexalign {

namespace {

std::map<Eigen::Index, std::set<Eigen::Index>> build_eval_map(
    const std::vector<BilingualLexicon::Pair>& pairs) {
  std::map<Eigen::Index, std::set<Eigen::Index>> eval_map;
  for (const auto& [src, tgt] : pairs) eval_map[src].insert(tgt);
  return eval_map;
}

}  // namespace

BilingualLexicon make_lexicon(std::vector<BilingualLexicon::Pair> pairs,
                              Eigen::Index n_source, Eigen::Index n_target) {
  if (pairs.empty()) {
    throw std::invalid_argument("lexicon must contain at least one pair");
  }
  for (const auto& [src, tgt] : pairs) {
    if (src < 0 || tgt < 0 || (n_source > 0 && src >= n_source) ||
        (n_target > 0 && tgt >= n_target)) {
      throw std::out_of_range("lexicon pair index out of vocabulary bounds");
    }
  }
  BilingualLexicon lex;
  lex.pairs = std::move(pairs);
  lex.eval_map = build_eval_map(lex.pairs);
  lex.coverage = 1.0;
  return lex;
}

BilingualLexicon load_lexicon(const std::filesystem::path& path,
                              const Vocabulary& src_vocab,
                              const Vocabulary& tgt_vocab) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open lexicon file: " + path.string());
  }

  BilingualLexicon lex;
  std::string line;
  std::size_t nonempty_lines = 0;
  std::size_t malformed = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string src_word, tgt_word, extra;
    if (!(tokens >> src_word)) continue;  // blank line
    ++nonempty_lines;
    if (!(tokens >> tgt_word) || (tokens >> extra)) {
      ++malformed;
      continue;
    }
    const auto src = src_vocab.find(src_word);
    const auto tgt = tgt_vocab.find(tgt_word);
    if (!src || !tgt) {
      ++lex.skipped_oov;
      continue;
    }
    lex.pairs.emplace_back(*src, *tgt);
  }
  if (malformed > 0) {
    std::cerr << "warning: " << path.string() << ": skipped " << malformed
              << " malformed line(s)\n";
  }
  if (lex.pairs.empty()) {
    throw std::runtime_error("no lexicon pairs resolved from " + path.string());
  }
  lex.eval_map = build_eval_map(lex.pairs);
  lex.coverage = nonempty_lines == 0
                     ? 0.0
                     : static_cast<double>(lex.pairs.size()) /
                           static_cast<double>(nonempty_lines);
  return lex;
}

std::pair<BilingualLexicon, BilingualLexicon> split_validation(
    const BilingualLexicon& lex, double fraction, std::uint64_t seed) {
  if (lex.size() < 2) {
    throw std::invalid_argument("split_validation needs at least two pairs");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }

  // Distinct sources in order of first appearance, then a seeded shuffle.
  std::vector<Eigen::Index> sources;
  {
    std::set<Eigen::Index> seen;
    for (const auto& [src, tgt] : lex.pairs) {
      if (seen.insert(src).second) sources.push_back(src);
    }
  }
  const auto n_distinct = sources.size();
  const auto n_valid = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n_distinct)));
  if (n_valid < 1 || n_valid >= n_distinct) {
    throw std::invalid_argument("split fraction leaves an empty side");
  }
  detail::seeded_shuffle(sources, seed);
  std::set<Eigen::Index> valid_sources(sources.begin(),
                                       sources.begin() + static_cast<long>(n_valid));

  std::vector<BilingualLexicon::Pair> train_pairs, valid_pairs;
  for (const auto& pair : lex.pairs) {
    (valid_sources.count(pair.first) ? valid_pairs : train_pairs).push_back(pair);
  }
  auto train = make_lexicon(std::move(train_pairs));
  auto valid = make_lexicon(std::move(valid_pairs));
  train.coverage = lex.coverage;
  valid.coverage = lex.coverage;
  return {std::move(train), std::move(valid)};
}

BilingualLexicon filter_exact_matches(const BilingualLexicon& lex,
                                      const Vocabulary& src_vocab,
                                      const Vocabulary& tgt_vocab) {
  std::vector<BilingualLexicon::Pair> kept;
  kept.reserve(lex.pairs.size());
  for (const auto& pair : lex.pairs) {
    if (src_vocab.word(pair.first) != tgt_vocab.word(pair.second)) {
      kept.push_back(pair);
    }
  }
  if (kept.empty()) {
    throw std::runtime_error("filter_exact_matches removed every pair");
  }
  auto filtered = make_lexicon(std::move(kept));
  filtered.coverage = lex.coverage;
  filtered.skipped_oov = lex.skipped_oov;
  return filtered;
}

}  // namespace lexalign
