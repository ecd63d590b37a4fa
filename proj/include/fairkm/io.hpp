#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fairkm/dataset.hpp"

namespace fairkm {

// Reads a header-first, comma-separated file. An empty feature list selects
// every column except the group column. Group ids follow first appearance.
Dataset load_csv(std::istream& in, const std::vector<std::string>& feature_columns,
                 const std::string& group_column);
Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& feature_columns,
                 const std::string& group_column);

// Columns f0..f{d-1},group. Values use the shortest round-trip representation.
void write_csv(std::ostream& out, const Dataset& ds);
std::string to_csv(const Dataset& ds);

// Shortest decimal string that parses back to the same double.
std::string format_real(double v);

// Column-wise z-scoring; constant columns are centered only.
Dataset standardized(const Dataset& ds);

// n rows drawn without replacement, original row order kept.
Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Synthetic dataset description, JSON:
// {"groups": [...], "components": [{"mean": [...], "variance": [...], "counts": [...]}, ...]}
SyntheticSpec parse_synthetic_spec(std::string_view json_text, std::uint64_t seed);

std::vector<std::string> preset_names();
// Throws ConfigError listing the valid names when the preset is unknown.
SyntheticSpec preset_spec(const std::string& name, std::uint64_t seed);
// The JSON document the presets are read from.
std::string_view preset_document();

// FNV-1a over raw bytes; used as a content fingerprint in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace fairkm
