#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace fairkm::cli {

// Files produced by one command, keyed by path relative to the output base.
// Nothing touches the disk until commit().
struct OutputSet {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string contents) { files[name] = std::move(contents); }

  // Writes every file to a temporary sibling, then renames them into place.
  void commit(const std::filesystem::path& base) const;
};

struct Destination {
  std::filesystem::path base;  // directory the outputs live in
  std::string manifest_name;   // manifest file name inside base
};

// `-o ds.csv` for gen-data, `-o dir/` for everything else.
Destination file_destination(const std::filesystem::path& out);
Destination dir_destination(const std::filesystem::path& out);

std::string hex64(std::uint64_t v);
std::string read_file(const std::filesystem::path& path);

// `dataset` may be null for commands without an input dataset.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, const nlohmann::json& dataset,
                             std::uint64_t seed, double wall_seconds, const OutputSet& outputs);

// Commits outputs and then the manifest, which is written last.
void publish(const Destination& dest, const OutputSet& outputs, const nlohmann::json& manifest);

}  // namespace fairkm::cli
