#include "lexalign/run_io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lexalign {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

}  // namespace

void save_mapping(const MappingMatrix& w, const std::filesystem::path& path) {
  if (w.w.rows() != w.w.cols() || w.w.rows() == 0) {
    throw std::invalid_argument("save mapping: matrix must be square and nonempty");
  }
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");

  out << w.w.rows() << '\n';
  char buffer[64];
  for (Eigen::Index i = 0; i < w.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.w.cols(); ++j) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", w.w(i, j));
      if (j > 0) out << ' ';
      out << buffer;
    }
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

MappingMatrix load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");

  std::string header;
  if (!std::getline(in, header)) fail(path, "missing header");
  std::istringstream head(header);
  Eigen::Index d = 0;
  std::string extra;
  if (!(head >> d) || d <= 0 || (head >> extra)) fail(path, "malformed header");

  MappingMatrix mapping;
  mapping.constraint = ConstraintDomain::Unconstrained;
  mapping.w.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(in >> mapping.w(i, j))) fail(path, "truncated matrix");
    }
  }
  return mapping;
}

std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");

  std::uint64_t hash = 1469598103934665603ull;
  char chunk[65536];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(hex);
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["command"] = manifest.command;
  doc["version"] = manifest.version;
  doc["seed"] = manifest.seed;
  doc["config"] = nlohmann::json::object();
  for (const auto& [key, value] : manifest.config) doc["config"][key] = value;
  doc["input_digests"] = nlohmann::json::object();
  for (const auto& [key, value] : manifest.input_digests) doc["input_digests"][key] = value;
  doc["outputs"] = nlohmann::json::object();
  for (const auto& [key, value] : manifest.outputs) doc["outputs"][key] = value;
  doc["wall_seconds"] = manifest.wall_seconds;

  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) fail(path, "write failed");
}

}  // namespace lexalign
