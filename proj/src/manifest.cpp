#include "glosspipe/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "glosspipe/errors.hpp"
#include "glosspipe/tensor.hpp"

namespace glosspipe {

std::string hash_file_contents(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input for hashing: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::uint64_t h = fnv1a64(buf.str());
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), hash_file_contents(path));
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["artifact_version"] = kArtifactVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  nlohmann::json ins = nlohmann::json::array();
  for (const auto& [p, h] : inputs) ins.push_back({{"path", p}, {"fnv1a64", h}});
  j["inputs"] = ins;
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace glosspipe
