// One PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/helpers.hpp"
#include "fairkm/fair_swap.hpp"
#include "fairkm/io.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/pareto.hpp"
#include "fairkm/sa2gd.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fairkm;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(FAIRKM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double last_trace_balance(const fs::path& trace) {
  std::istringstream in(slurp(trace));
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return std::stod(last.substr(last.rfind(',') + 1));
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("fairkm-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Outcome balance_arithmetic() {
  const double adult_like = dataset_balance(testutil::dataset_with_group_sizes({67, 33}));
  // Bank marketing marital status: divorced, single, married.
  const double bank = dataset_balance(testutil::dataset_with_group_sizes({4612, 11568, 24928}));
  const bool pass = std::abs(adult_like - 0.4925) < 1e-4 && std::abs(bank - 0.185) <= 0.005;
  return {pass, "67:33 -> " + fmt(adult_like) + ", Bank counts -> " + fmt(bank)};
}

Outcome extreme_tradeoffs() {
  int ok = 0;
  std::string detail;
  for (int seed = 1; seed <= 5; ++seed) {
    const auto dir = scratch_dir() / ("c2_" + std::to_string(seed));
    const std::string data = (dir / "ds.csv").string();
    const std::string s = std::to_string(seed);
    if (cli("gen-data --preset syn_equal_ds1 --seed " + s + " -o " + data) != 0) return {false, "gen-data failed"};
    auto run = [&](int na, int nb) {
      const auto out = dir / ("run_" + std::to_string(na) + "_" + std::to_string(nb));
      if (cli("run " + data + " -K 2 --iters 400 --na " + std::to_string(na) + " --nb " + std::to_string(nb) +
              " --seed " + s + " -o " + out.string()) != 0)
        return std::numeric_limits<double>::quiet_NaN();
      return last_trace_balance(out / "trace.csv");
    };
    const double low = run(4, 0), high = run(0, 4), mid = run(8, 1);
    const bool seed_ok = low <= 0.05 && high >= 0.95 && mid > low && mid < high && mid > 0.05 && mid < 0.95;
    ok += seed_ok;
    detail += (seed > 1 ? "; " : "") + fmt(low) + "/" + fmt(mid) + "/" + fmt(high);
  }
  return {ok >= 4, std::to_string(ok) + "/5 seeds, balance (4,0)/(8,1)/(0,4): " + detail};
}

Outcome brute_force_front() {
  Rng rng(2024);
  int instances = 0, max_hit = 0, clean = 0;
  double worst_excess = 0.0;
  for (std::size_t N = 6; N <= 10; ++N) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto ds = testutil::random_dataset(rng, N, 2, 2);
      std::vector<ParetoPoint> all;
      double best_balance = 0.0;
      for (unsigned mask = 1; mask + 1 < (1u << N); ++mask) {
        Labels labels(N);
        for (std::size_t p = 0; p < N; ++p) labels[p] = (mask >> p) & 1u;
        all.push_back(ParetoPoint{clustering_cost(ds, labels, 2), clustering_balance(ds, labels, 2), {}, {}});
        best_balance = std::max(best_balance, all.back().balance);
      }
      const auto exact = filter_nondominated(all);

      ParetoConfig cfg;
      cfg.max_iter = 200;
      cfg.master_seed = rng();
      const auto archive = pareto_front_run(ds, cfg);

      double got_balance = 0.0;
      double excess = 0.0;
      for (const auto& p : archive.points) {
        got_balance = std::max(got_balance, p.balance);
        for (const auto& e : exact)
          if (e.balance >= p.balance) excess = std::max(excess, p.cost - e.cost);
      }
      ++instances;
      max_hit += got_balance == best_balance;
      clean += excess <= 1e-9;
      worst_excess = std::max(worst_excess, excess);
    }
  }
  return {max_hit == instances && clean == instances,
          std::to_string(instances) + " instances N=6..10: max balance reached " + std::to_string(max_hit) +
              ", no dominated point " + std::to_string(clean) + ", worst cost excess " + fmt(worst_excess)};
}

Outcome swap_monotonicity() {
  Rng rng(4);
  int performed = 0, infeasible = 0, other = 0, violations = 0;
  auto check_skip = [&](const SwapReport& r, const ClusterState& before, const ClusterState& after) {
    if (r.reason == "infeasible swap") ++infeasible;
    else ++other;
    if (!(after == before)) ++violations;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const int J = 2 + static_cast<int>(rng.index(2));
    const int K = 2 + static_cast<int>(rng.index(4));
    const std::size_t N = 8 + rng.index(60);
    const auto ds = testutil::random_dataset(rng, N, 2, J);
    auto s = state_from_labels(ds, testutil::random_labels(rng, N, K), K);
    const auto before = s;
    const auto ob = overall_balance(before);
    SwapPolicy policy;
    policy.target = rng.index(2) ? TargetMode::Global : TargetMode::Local;
    const auto r = swap_step(ds, s, policy, rng, rng.index(400));
    if (!r.performed) {
      check_skip(r, before, s);
      continue;
    }
    ++performed;
    const CountRatio old_ratio{before.group_counts(r.l, r.under), before.group_counts(r.l, r.over)};
    const CountRatio new_ratio{s.group_counts(r.l, r.under), s.group_counts(r.l, r.over)};
    if (r.l != ob.cluster || !(old_ratio < new_ratio) || !tallies_consistent(ds, s) || s.counts != before.counts)
      ++violations;
  }
  // A state with a known infeasible swap, so the skip path is always exercised.
  const auto ds = testutil::make_dataset({{10.0}, {10.1}, {0.0}, {0.1}, {1.0}, {1.1}}, {0, 1, 1, 1, 1, 1});
  auto s = state_from_labels(ds, Labels{0, 0, 1, 1, 2, 2}, 3);
  const auto before = s;
  check_skip(swap_step(ds, s, SwapPolicy{}, rng), before, s);

  return {violations == 0 && infeasible > 0,
          std::to_string(performed) + " swaps performed, " + std::to_string(infeasible) + " infeasible and " +
              std::to_string(other) + " balanced skips, " + std::to_string(violations) + " violations"};
}

Outcome minibatch_lloyd() {
  const auto ds = testutil::make_dataset({{0.0}, {1.0}, {10.0}, {11.0}}, {0, 1, 0, 1});
  int matched = 0, starts = 0;
  for (const Labels& start : {Labels{0, 1, 0, 1}, Labels{0, 1, 1, 1}, Labels{1, 1, 0, 0}, Labels{0, 0, 0, 1}}) {
    ++starts;
    // Lloyd oracle: exact means, then nearest-centre reassignment until stable.
    Labels lloyd = start;
    for (int it = 0; it < 100; ++it) {
      const auto c = exact_centroids(ds, lloyd, 2);
      Labels next(4);
      for (std::size_t p = 0; p < 4; ++p) next[p] = closest_center<double>(ds.points.row(p), c);
      if (next == lloyd) break;
      lloyd = next;
    }
    auto s = state_from_labels(ds, start, 2);
    Rng rng(5);
    for (int it = 0; it < 50; ++it) minibatch_kmeans_step(ds, s, 4, rng);
    const bool same_partition = (s.labels[0] == s.labels[1]) == (lloyd[0] == lloyd[1]) &&
                                (s.labels[2] == s.labels[3]) == (lloyd[2] == lloyd[3]) &&
                                (s.labels[0] == s.labels[2]) == (lloyd[0] == lloyd[2]);
    const bool split = s.labels[0] == s.labels[1] && s.labels[2] == s.labels[3] && s.labels[0] != s.labels[2];
    matched += same_partition && split;
  }

  auto s = state_from_labels(ds, Labels{0, 0, 1, 1}, 2);
  s.centroids << 1.0, 10.0;
  Rng rng(6);
  for (int pass = 0; pass < 600000; ++pass) minibatch_kmeans_step(ds, s, 4, rng);
  const double err = (s.centroids - exact_centroids(ds, s.labels, 2)).cwiseAbs().maxCoeff();
  return {matched == starts && err < 1e-6, std::to_string(matched) + "/" + std::to_string(starts) +
                                               " starts reach the Lloyd partition, streaming centroid error " +
                                               fmt(err) + " after 600000 full passes"};
}

Outcome nondominance_filter() {
  Rng rng(7);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ParetoPoint> pts;
    for (int i = 0; i < 200; ++i) {
      const double c = rng.index(2) ? std::floor(rng.uniform() * 40) : rng.uniform() * 40;
      const double b = rng.index(2) ? std::floor(rng.uniform() * 10) / 10 : rng.uniform();
      pts.push_back(ParetoPoint{c, b, {}, {}});
    }
    std::vector<std::size_t> oracle;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool removed = false;
      for (std::size_t j = 0; j < pts.size() && !removed; ++j) {
        if (i == j) continue;
        removed = dominates(pts[j], pts[i]) ||
                  (j < i && pts[j].cost == pts[i].cost && pts[j].balance == pts[i].balance);
      }
      if (!removed) oracle.push_back(i);
    }
    auto got = nondominated_indices(pts);
    std::sort(got.begin(), got.end());
    agree += got == oracle;
  }
  return {agree == 100, std::to_string(agree) + "/100 clouds identical to the pairwise oracle"};
}

Outcome sa2gd_rate() {
  Vector<double> x0(2);
  x0 << 3.0, 3.0;
  RateExperimentConfig cfg;
  cfg.seeds = 20;
  cfg.master_seed = 11;
  const auto noisy = rate_experiment(problem_preset("quadratic", 1.0), x0, cfg);
  const bool slope_ok = noisy.fit.slope >= -1.3 && noisy.fit.slope <= -0.7;

  const auto clean = problem_preset("quadratic", 0.0);
  auto distance = [&](int na, int nb, std::size_t T) {
    const double lambda = double(na) / double(na + nb);
    const auto tr = sa2gd_run(clean, x0, na, nb, T, StepSchedule::diminishing(clean.strong_convexity(lambda)), 1);
    return (tr.final_iterate() - clean.minimizer(lambda)).norm();
  };
  const double converged = distance(1, 1, 2000000);
  double targeting = 0.0;
  for (auto [na, nb] : {std::pair{1, 1}, std::pair{3, 1}, std::pair{1, 3}})
    targeting = std::max(targeting, distance(na, nb, 10000));

  return {slope_ok && converged < 1e-6 && targeting < 1e-3,
          "slope " + fmt(noisy.fit.slope) + " over T=100..10000 with 20 seeds, noiseless distance " + fmt(converged) +
              " at T=2e6, worst lambda* targeting error " + fmt(targeting) + " at T=1e4"};
}

Outcome determinism() {
  const auto dir = scratch_dir() / "c8";
  const std::string data = (dir / "ds.csv").string();
  if (cli("gen-data --preset syn_unequal_ds2 --seed 3 -o " + data) != 0) return {false, "gen-data failed"};
  const std::vector<std::pair<std::string, std::string>> commands{
      {"run", "run " + data + " --na 3 --nb 1 --seed 5 --threads 4 -o " + (dir / "run").string()},
      {"pareto", "pareto " + data + " --max-iter 60 --seed 5 --threads 4 -o " + (dir / "pareto").string()},
      {"sa2gd", "sa2gd --seeds 20 --seed 5 --threads 4 -o " + (dir / "sa2gd").string()}};
  int verified = 0, total = 0;
  std::string failed;
  for (const auto& [name, args] : commands) {
    if (cli(args) != 0) return {false, name + " failed to run"};
    for (const char* threads : {"1", "3"}) {
      ++total;
      if (cli("verify " + (dir / name / "manifest.json").string() + " --threads " + threads) == 0)
        ++verified;
      else
        failed += " " + name + "@" + threads;
    }
  }
  ++total;
  if (cli("verify " + (dir / "ds.csv.manifest.json").string()) == 0)
    ++verified;
  else
    failed += " gen-data";
  return {verified == total, std::to_string(verified) + "/" + std::to_string(total) +
                                 " re-runs byte-identical (threads 4 vs 1 and 3)" +
                                 (failed.empty() ? "" : ", mismatched:" + failed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"balance arithmetic", balance_arithmetic},
      {"extreme trade-offs", extreme_tradeoffs},
      {"brute-force Pareto oracle", brute_force_front},
      {"swap monotonicity", swap_monotonicity},
      {"mini-batch/Lloyd consistency", minibatch_lloyd},
      {"nondominance filter oracle", nondominance_filter},
      {"SA2GD rate", sa2gd_rate},
      {"determinism", determinism}};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << " [" << fmt(secs) << " s]" << std::endl;
  }
  fs::remove_all(scratch_dir());
  return failures == 0 ? 0 : 1;
}
