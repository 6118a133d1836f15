#include "lexalign/embeddings.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lexalign {

namespace {

constexpr double kZeroNormTol = 1e-12;

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::optional<Eigen::Index> Vocabulary::add(std::string word) {
  auto [it, inserted] = index_.try_emplace(std::move(word), size());
  if (!inserted) return std::nullopt;
  words_.push_back(it->first);
  return it->second;
}

EmbeddingMatrix load_text_embeddings(const std::filesystem::path& path,
                                     Eigen::Index max_vocab) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open embedding file: " + path.string());
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty embedding file: " + path.string());
  }
  strip_cr(line);

  long long header_n = 0, header_d = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> header_n >> header_d) || (header >> extra) ||
        header_n <= 0 || header_d <= 0) {
      throw std::runtime_error("malformed embedding header: \"" + line + "\"");
    }
  }

  const Eigen::Index d = static_cast<Eigen::Index>(header_d);
  const Eigen::Index want =
      max_vocab > 0 ? std::min<Eigen::Index>(max_vocab, header_n) : header_n;

  EmbeddingMatrix emb;
  emb.vectors.resize(want, d);
  Eigen::Index loaded = 0;
  std::size_t duplicates = 0;
  long long consumed = 0;

  while (loaded < want && consumed < header_n && std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;  // blank lines do not spend the row budget
    ++consumed;

    const std::size_t word_end = line.find(' ');
    if (word_end == std::string::npos || word_end == 0) {
      throw std::runtime_error("malformed embedding row " + std::to_string(consumed) +
                               ": missing values");
    }
    std::string word = line.substr(0, word_end);

    const char* cursor = line.c_str() + word_end;
    Eigen::Index col = 0;
    while (col < d) {
      char* parsed_end = nullptr;
      errno = 0;
      const double value = std::strtod(cursor, &parsed_end);
      if (parsed_end == cursor) break;  // no more numbers
      emb.vectors(loaded, col) = value;
      cursor = parsed_end;
      ++col;
    }
    while (*cursor == ' ') ++cursor;
    if (col != d || *cursor != '\0') {
      throw std::runtime_error("embedding row " + std::to_string(consumed) + " (\"" +
                               word + "\") does not have " + std::to_string(d) +
                               " values");
    }

    if (!emb.vocab.add(std::move(word))) {
      ++duplicates;
      continue;  // first occurrence wins; do not count toward max_vocab
    }
    ++loaded;
  }

  if (duplicates > 0) {
    std::cerr << "warning: " << path.string() << ": skipped " << duplicates
              << " duplicate word(s)\n";
  }
  if (loaded == 0) {
    throw std::runtime_error("no embeddings loaded from " + path.string());
  }
  if (loaded < want) {
    std::cerr << "warning: " << path.string() << ": header announces " << header_n
              << " rows but only " << loaded << " loaded\n";
    emb.vectors.conservativeResize(loaded, d);
  }
  emb.norm_state = NormState::Raw;
  return emb;
}

namespace {

EmbeddingMatrix normalize_rows(EmbeddingMatrix emb, NormState final_state) {
  emb.zero_rows.clear();
  for (Eigen::Index i = 0; i < emb.vectors.rows(); ++i) {
    const double norm = emb.vectors.row(i).norm();
    if (norm < kZeroNormTol) {
      emb.vectors.row(i).setZero();
      emb.zero_rows.insert(i);
    } else {
      emb.vectors.row(i) /= norm;
    }
  }
  emb.norm_state = final_state;
  return emb;
}

}  // namespace

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& emb) {
  if (emb.norm_state != NormState::Raw) {
    throw std::invalid_argument("l2_normalize expects raw embeddings");
  }
  return normalize_rows(emb, NormState::L2Normalized);
}

EmbeddingMatrix center_then_normalize(const EmbeddingMatrix& emb) {
  if (emb.norm_state != NormState::Raw) {
    throw std::invalid_argument("center_then_normalize expects raw embeddings");
  }
  EmbeddingMatrix centered = emb;
  const Eigen::RowVectorXd mean = centered.vectors.colwise().mean();
  centered.vectors.rowwise() -= mean;
  return normalize_rows(std::move(centered), NormState::CenteredL2Normalized);
}

void save_text_embeddings(const EmbeddingMatrix& emb,
                          const std::filesystem::path& path, int precision) {
  if (emb.rows() == 0) {
    throw std::invalid_argument("refusing to save an empty embedding matrix");
  }
  if (precision < 1 || precision > 17) {
    throw std::invalid_argument("save precision must be in [1, 17]");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << emb.rows() << ' ' << emb.dim() << '\n';
  char buffer[64];
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    out << emb.vocab.word(i);
    for (Eigen::Index j = 0; j < emb.dim(); ++j) {
      std::snprintf(buffer, sizeof(buffer), " %.*g", precision, emb.vectors(i, j));
      out << buffer;
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace lexalign
