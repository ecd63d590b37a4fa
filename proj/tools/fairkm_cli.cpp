#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "fairkm/types.hpp"

namespace fs = std::filesystem;
using namespace fairkm::cli;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("dataset", d.path, "Dataset CSV (header row, comma-separated)")->required();
  cmd->add_option("--feature-columns", d.feature_columns, "Feature columns (default: all but the group column)")
      ->delimiter(',');
  cmd->add_option("--group-column", d.group_column, "Demographic group column")->capture_default_str();
  cmd->add_flag("--zscore", d.zscore, "Z-score every feature column before clustering");
  cmd->add_option("--subsample", d.subsample, "Keep a random subset of this many rows (0 keeps all)");
}

void add_swap_options(CLI::App* cmd, SwapOptions& s) {
  cmd->add_option("--target", s.target, "Swap target cluster: local (nearest centroid) or global")
      ->check(CLI::IsMember({"local", "global"}))
      ->capture_default_str();
  cmd->add_option("--candidates", s.candidates, "Initial candidate pool size per swap side")->capture_default_str();
  cmd->add_option("--growth", s.growth, "Pool size increment")->capture_default_str();
  cmd->add_option("--growth-interval", s.growth_interval, "Iterations between pool increments (0 = never)")
      ->capture_default_str();
}

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).lexically_normal().string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair k-means trade-off fronts and stochastic alternating bi-objective descent"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (default: FAIRKM_THREADS, else all cores)");
  app.add_option("-o,--out", out, "Output file (gen-data) or directory");

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic Gaussian-mixture dataset");
  gen_cmd->add_option("--preset", gen.preset, "Built-in preset name");
  gen_cmd->add_option("--spec", gen.spec_file, "JSON dataset description");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "One SAfairKM run with a per-iteration cost/balance trace");
  add_data_options(run_cmd, run.data);
  run_cmd->add_option("-K,--clusters", run.K, "Number of clusters")->capture_default_str();
  run_cmd->add_option("--na", run.n_a, "k-means points per iteration")->capture_default_str();
  run_cmd->add_option("--nb", run.n_b, "Swap updates per iteration")->capture_default_str();
  run_cmd->add_option("--iters", run.iters, "Iterations")->capture_default_str();
  run_cmd->add_flag("--gnuplot", run.gnuplot, "Also write a gnuplot script for the trace");
  add_swap_options(run_cmd, run.swap);

  ParetoOptions pareto;
  std::string pairs_text = "4:0,3:1,1:3,0:4";
  auto* pareto_cmd = app.add_subcommand("pareto", "Approximate the cost/balance Pareto front");
  add_data_options(pareto_cmd, pareto.data);
  pareto_cmd->add_option("-K,--clusters", pareto.K, "Number of clusters")->capture_default_str();
  pareto_cmd->add_option("--pairs", pairs_text, "Comma-separated n_a:n_b pairs")->capture_default_str();
  pareto_cmd->add_option("--initial", pareto.initial, "Number of random starting labelings")->capture_default_str();
  pareto_cmd->add_option("--q", pareto.q, "SAfairKM iterations per child")->capture_default_str();
  pareto_cmd->add_option("--budget", pareto.budget, "Stop once the archive exceeds this size")->capture_default_str();
  pareto_cmd->add_option("--max-iter", pareto.max_iter, "Maximum outer iterations")->capture_default_str();
  pareto_cmd->add_option("--dedupe-eps", pareto.dedupe_eps, "Merge points closer than this in both objectives")
      ->capture_default_str();
  pareto_cmd->add_flag("--strict-prune", pareto.strict_prune,
                       "Prune only points beaten in both objectives strictly (ties survive)");
  pareto_cmd->add_flag("--gnuplot", pareto.gnuplot, "Also write a gnuplot script for the front");
  add_swap_options(pareto_cmd, pareto.swap);

  Sa2gdOptions sa;
  auto* sa_cmd = app.add_subcommand("sa2gd", "Empirical convergence-rate experiment for SA2GD");
  sa_cmd->add_option("--problem", sa.problem, "Problem preset")
      ->check(CLI::IsMember({"quadratic", "isotropic"}))
      ->capture_default_str();
  sa_cmd->add_option("--na", sa.n_a, "Steps on f_a per outer iteration")->capture_default_str();
  sa_cmd->add_option("--nb", sa.n_b, "Steps on f_b per outer iteration")->capture_default_str();
  sa_cmd->add_option("--T", sa.horizons, "Horizons (comma-separated, at least 4 distinct)")->delimiter(',');
  sa_cmd->add_option("--seeds", sa.seeds, "Runs per horizon")->capture_default_str();
  sa_cmd->add_option("--sigma", sa.sigma, "Gradient noise standard deviation")->capture_default_str();

  std::string manifest;
  auto* verify_cmd = app.add_subcommand("verify", "Re-run a manifest and byte-compare its outputs");
  verify_cmd->add_option("manifest", manifest, "manifest.json written by a previous command")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) {
      gen.seed = seed;
      gen.out = out;
      gen.spec_file = absolute(gen.spec_file);
      cmd_gen_data(gen, std::cout);
    } else if (*run_cmd) {
      run.seed = seed;
      run.out = out;
      run.data.path = absolute(run.data.path);
      cmd_run(run, std::cout);
    } else if (*pareto_cmd) {
      pareto.seed = seed;
      pareto.threads = threads;
      pareto.out = out;
      pareto.pairs = parse_pairs(pairs_text);
      pareto.data.path = absolute(pareto.data.path);
      cmd_pareto(pareto, std::cout);
    } else if (*sa_cmd) {
      sa.seed = seed;
      sa.threads = threads;
      sa.out = out;
      cmd_sa2gd(sa, std::cout);
    } else if (*verify_cmd) {
      return cmd_verify(manifest, threads, std::cout) ? kOk : kRuntime;
    }
  } catch (const fairkm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fairkm::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
