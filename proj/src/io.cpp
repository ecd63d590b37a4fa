#include "fairkm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace fairkm {

namespace detail {
extern const std::string_view kPresetJson;
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Comma split with RFC 4180 double-quote handling.
std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Dataset load_csv(std::istream& in, const std::vector<std::string>& feature_columns,
                 const std::string& group_column) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty (header row expected)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_row(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("CSV has no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t group_idx = column_index(group_column);
  std::vector<std::size_t> feature_idx;
  if (feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != group_idx) feature_idx.push_back(c);
  } else {
    for (const auto& f : feature_columns) feature_idx.push_back(column_index(f));
  }
  if (feature_idx.empty()) throw ConfigError("no feature columns selected");

  std::vector<double> values;
  Dataset ds;
  std::unordered_map<std::string, int> group_ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    for (auto c : feature_idx) {
      double v = 0.0;
      if (!parse_real(cells[c], v))
        throw DataError("row " + std::to_string(row) + ", column '" + header[c] + "': cannot parse '" + cells[c] +
                        "' as a real number");
      values.push_back(v);
    }
    const auto& g = cells[group_idx];
    if (g.empty())
      throw DataError("row " + std::to_string(row) + ", column '" + group_column + "': empty group value");
    auto [it, inserted] = group_ids.try_emplace(g, static_cast<int>(ds.group_names.size()));
    if (inserted) ds.group_names.push_back(g);
    ds.group_of.push_back(it->second);
  }

  const auto n = static_cast<Eigen::Index>(ds.group_of.size());
  const auto d = static_cast<Eigen::Index>(feature_idx.size());
  ds.points = Eigen::Map<const RowMatrix<double>>(values.data(), n, d);
  validate(ds);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& feature_columns,
                 const std::string& group_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_csv(in, feature_columns, group_column);
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t k = 0; k < ds.dim(); ++k) out << 'f' << k << ',';
  out << "group\n";
  for (std::size_t p = 0; p < ds.size(); ++p) {
    for (std::size_t k = 0; k < ds.dim(); ++k)
      out << format_real(ds.points(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k))) << ',';
    out << ds.group_names[static_cast<std::size_t>(ds.group_of[p])] << '\n';
  }
}

std::string to_csv(const Dataset& ds) {
  std::ostringstream os;
  write_csv(os, ds);
  return os.str();
}

Dataset standardized(const Dataset& ds) {
  Dataset out = ds;
  const auto n = static_cast<double>(ds.size());
  for (Eigen::Index k = 0; k < out.points.cols(); ++k) {
    auto col = out.points.col(k);
    const double mean = col.sum() / n;
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (sd > 0.0) col /= sd;
  }
  return out;
}

Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n >= ds.size()) return ds;
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(split_seed(seed, {0x5355'4253ULL}));
  rows = rng.sample(std::move(rows), n);
  std::sort(rows.begin(), rows.end());

  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(n), ds.points.cols());
  std::vector<int> remap(ds.groups(), -1);
  for (std::size_t i = 0; i < n; ++i) {
    out.points.row(static_cast<Eigen::Index>(i)) = ds.points.row(static_cast<Eigen::Index>(rows[i]));
    const int g = ds.group_of[rows[i]];
    if (remap[static_cast<std::size_t>(g)] < 0) {
      remap[static_cast<std::size_t>(g)] = static_cast<int>(out.group_names.size());
      out.group_names.push_back(ds.group_names[static_cast<std::size_t>(g)]);
    }
    out.group_of.push_back(remap[static_cast<std::size_t>(g)]);
  }
  validate(out);
  return out;
}

namespace {

SyntheticSpec spec_from_json(const nlohmann::json& j, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  try {
    spec.group_names = j.at("groups").get<std::vector<std::string>>();
    for (const auto& c : j.at("components")) {
      GaussianComponent<double> comp;
      const auto mean = c.at("mean").get<std::vector<double>>();
      const auto var = c.at("variance").get<std::vector<double>>();
      comp.mean = Eigen::Map<const Vector<double>>(mean.data(), static_cast<Eigen::Index>(mean.size()));
      comp.variance = Eigen::Map<const Vector<double>>(var.data(), static_cast<Eigen::Index>(var.size()));
      comp.counts = c.at("counts").get<std::vector<std::int64_t>>();
      spec.components.push_back(std::move(comp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed synthetic spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

const nlohmann::json& presets() {
  static const nlohmann::json doc = nlohmann::json::parse(detail::kPresetJson);
  return doc;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view json_text, std::uint64_t seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("synthetic spec is not valid JSON: ") + e.what());
  }
  return spec_from_json(j, seed);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [key, value] : presets().items())
    if (!key.empty() && key.front() != '_') names.push_back(key);
  return names;
}

SyntheticSpec preset_spec(const std::string& name, std::uint64_t seed) {
  const auto& doc = presets();
  if (name.empty() || name.front() == '_' || !doc.contains(name)) {
    std::string msg = "unknown preset '" + name + "'; valid presets:";
    for (const auto& n : preset_names()) msg += " " + n;
    throw ConfigError(msg);
  }
  return spec_from_json(doc.at(name), seed);
}

std::string_view preset_document() { return detail::kPresetJson; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fairkm
