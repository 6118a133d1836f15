#pragma once

#include "lexalign/baselines.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lexalign {

inline constexpr const char* kToolVersion = "0.1.0";

/// Mapping-matrix file: header "d", then d rows of d floats at 17 significant
/// digits, so a 64-bit round trip is value-faithful.
void save_mapping(const MappingMatrix& w, const std::filesystem::path& path);
MappingMatrix load_mapping(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest_hex(const std::filesystem::path& path);

/// One manifest per run: the command, every resolved config value, input
/// digests, and timings. The config snapshot is sufficient to re-run the
/// command.
struct RunManifest {
  std::string command;
  std::string version = kToolVersion;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // flag -> value
  std::vector<std::pair<std::string, std::string>> input_digests;
  std::vector<std::pair<std::string, std::string>> outputs;  // extra facts
  double wall_seconds = 0.0;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace lexalign
