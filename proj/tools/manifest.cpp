#include "manifest.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "fairkm/io.hpp"
#include "fairkm/types.hpp"

#ifndef FAIRKM_VERSION
#define FAIRKM_VERSION "dev"
#endif

namespace fs = std::filesystem;

namespace fairkm::cli {

namespace {

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void OutputSet::commit(const fs::path& base) const {
  const std::string suffix = ".tmp-" + std::to_string(::getpid());
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, contents] : files) {
      const fs::path target = base / name;
      fs::create_directories(target.parent_path());
      fs::path tmp = target;
      tmp += suffix;
      write_bytes(tmp, contents);
      staged.emplace_back(tmp, target);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& [tmp, target] : staged) fs::remove(tmp, ec);
    throw;
  }
  for (const auto& [tmp, target] : staged) fs::rename(tmp, target);
}

Destination file_destination(const fs::path& out) {
  if (out.empty()) throw ConfigError("an output path is required (-o)");
  const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  return {parent, out.filename().string() + ".manifest.json"};
}

Destination dir_destination(const fs::path& out) {
  if (out.empty()) throw ConfigError("an output directory is required (-o)");
  return {out, "manifest.json"};
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, const nlohmann::json& dataset,
                             std::uint64_t seed, double wall_seconds, const OutputSet& outputs) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, contents] : outputs.files)
    files.push_back({{"path", name}, {"bytes", contents.size()}, {"fnv1a64", hex64(fnv1a64(contents))}});
  nlohmann::json m;
  m["command"] = command;
  m["config"] = config;
  m["dataset"] = dataset;
  m["master_seed"] = seed;
  m["tool_version"] = FAIRKM_VERSION;
  m["wall_seconds"] = wall_seconds;
  m["outputs"] = files;
  return m;
}

void publish(const Destination& dest, const OutputSet& outputs, const nlohmann::json& manifest) {
  outputs.commit(dest.base);
  OutputSet m;
  m.add(dest.manifest_name, manifest.dump(2) + "\n");
  m.commit(dest.base);
}

}  // namespace fairkm::cli
