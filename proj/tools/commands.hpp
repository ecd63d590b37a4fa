#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fairkm::cli {

struct DataOptions {
  std::string path;
  std::vector<std::string> feature_columns;  // empty: every non-group column
  std::string group_column = "group";
  bool zscore = false;
  std::size_t subsample = 0;  // 0 keeps every row
};

struct SwapOptions {
  std::string target = "local";
  std::size_t candidates = 4;
  std::size_t growth = 1;
  std::size_t growth_interval = 50;
};

struct GenDataOptions {
  std::string preset;
  std::string spec_file;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunOptions {
  DataOptions data;
  int K = 2;
  int n_a = 1;
  int n_b = 1;
  std::size_t iters = 400;
  SwapOptions swap;
  std::uint64_t seed = 0;
  bool gnuplot = false;
  std::string out;
};

struct ParetoOptions {
  DataOptions data;
  int K = 2;
  std::vector<std::pair<int, int>> pairs{{4, 0}, {3, 1}, {1, 3}, {0, 4}};
  std::size_t initial = 10;
  int q = 1;
  std::size_t budget = 1500;
  std::size_t max_iter = 400;
  SwapOptions swap;
  double dedupe_eps = 0.0;
  bool strict_prune = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool gnuplot = false;
  std::string out;
};

struct Sa2gdOptions {
  std::string problem = "quadratic";
  int n_a = 1;
  int n_b = 1;
  std::vector<std::size_t> horizons{100, 316, 1000, 3162, 10000};
  std::size_t seeds = 20;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
};

// "4:0,3:1" -> {(4,0),(3,1)}.
std::vector<std::pair<int, int>> parse_pairs(const std::string& text);

// Each command computes everything in memory and publishes only on success.
// `log` receives the human-readable summary.
void cmd_gen_data(const GenDataOptions& o, std::ostream& log);
void cmd_run(const RunOptions& o, std::ostream& log);
void cmd_pareto(const ParetoOptions& o, std::ostream& log);
void cmd_sa2gd(const Sa2gdOptions& o, std::ostream& log);

// Re-runs the command a manifest describes into a scratch directory and
// byte-compares every listed output. threads > 0 overrides the recorded count.
// Returns true when all outputs match.
bool cmd_verify(const std::string& manifest_path, unsigned threads, std::ostream& log);

}  // namespace fairkm::cli
