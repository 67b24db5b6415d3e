#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace glosspipe {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Reproducibility record written before a command's outputs: identical
// manifests imply byte-identical outputs. Input hashes are FNV-1a 64
// content hashes (identity, not integrity).
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // flattened config snapshot
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, hash)
  std::uint64_t seed = 0;

  void add_input(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

std::string hash_file_contents(const std::filesystem::path& path);

}  // namespace glosspipe
