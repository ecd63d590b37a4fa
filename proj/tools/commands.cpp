#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "fairkm/io.hpp"
#include "fairkm/pareto.hpp"
#include "fairkm/sa2gd.hpp"
#include "json.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fairkm::cli {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DataOptions, path, feature_columns, group_column, zscore, subsample)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SwapOptions, target, candidates, growth, growth_interval)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GenDataOptions, preset, spec_file, seed, out)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunOptions, data, K, n_a, n_b, iters, swap, seed, gnuplot, out)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ParetoOptions, data, K, pairs, initial, q, budget, max_iter, swap,
                                                dedupe_eps, strict_prune, seed, threads, gnuplot, out)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Sa2gdOptions, problem, n_a, n_b, horizons, seeds, sigma, seed, threads,
                                                out)

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct LoadedData {
  Dataset ds;
  json info;
};

LoadedData load_data(const DataOptions& o, std::uint64_t seed) {
  if (o.path.empty()) throw ConfigError("a dataset path is required");
  const std::string bytes = read_file(o.path);
  std::istringstream in(bytes);
  LoadedData out{load_csv(in, o.feature_columns, o.group_column), {}};
  if (o.subsample > 0) out.ds = subsample(out.ds, o.subsample, seed);
  if (o.zscore) out.ds = standardized(out.ds);
  out.info = {{"path", o.path},
              {"fnv1a64", hex64(fnv1a64(bytes))},
              {"rows", out.ds.size()},
              {"dim", out.ds.dim()},
              {"groups", out.ds.group_names},
              {"dataset_balance", dataset_balance(out.ds)}};
  return out;
}

SwapPolicy make_policy(const SwapOptions& o) {
  SwapPolicy p;
  if (o.target == "local")
    p.target = TargetMode::Local;
  else if (o.target == "global")
    p.target = TargetMode::Global;
  else
    throw ConfigError("--target must be 'local' or 'global', got '" + o.target + "'");
  if (o.candidates < 1) throw ConfigError("--candidates must be >= 1");
  p.candidate_batch = o.candidates;
  p.batch_growth = o.growth;
  p.growth_interval = o.growth_interval;
  return p;
}

std::string labels_text(const Labels& labels) {
  std::string out;
  out.reserve(labels.size() * 2);
  for (int l : labels) {
    out += std::to_string(l);
    out += '\n';
  }
  return out;
}

}  // namespace

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
  std::vector<std::pair<int, int>> pairs;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("pair '" + item + "' is not of the form n_a:n_b");
    try {
      std::size_t used_a = 0, used_b = 0;
      const int a = std::stoi(item.substr(0, colon), &used_a);
      const int b = std::stoi(item.substr(colon + 1), &used_b);
      if (used_a != colon || used_b != item.size() - colon - 1) throw std::invalid_argument(item);
      pairs.emplace_back(a, b);
    } catch (const std::logic_error&) {
      throw ConfigError("pair '" + item + "' is not of the form n_a:n_b");
    }
  }
  if (pairs.empty()) throw ConfigError("at least one n_a:n_b pair is required");
  return pairs;
}

void cmd_gen_data(const GenDataOptions& o, std::ostream& log) {
  const auto start = Clock::now();
  if (o.preset.empty() == o.spec_file.empty()) throw ConfigError("give exactly one of --preset or --spec");
  const auto dest = file_destination(o.out);

  json source;
  SyntheticSpec spec;
  if (!o.preset.empty()) {
    spec = preset_spec(o.preset, o.seed);
    source = {{"preset", o.preset}};
  } else {
    const std::string text = read_file(o.spec_file);
    spec = parse_synthetic_spec(text, o.seed);
    source = {{"spec_file", o.spec_file}, {"fnv1a64", hex64(fnv1a64(text))}};
  }
  const Dataset ds = generate_gaussian_mixture(spec);

  OutputSet outputs;
  outputs.add(fs::path(o.out).filename().string(), to_csv(ds));
  publish(dest, outputs, make_manifest("gen-data", o, source, o.seed, seconds_since(start), outputs));

  const auto sizes = ds.group_sizes();
  log << "wrote " << ds.size() << " points, d = " << ds.dim() << ", group sizes";
  for (auto s : sizes) log << ' ' << s;
  log << ", dataset balance " << format_real(dataset_balance(ds)) << " to " << o.out << '\n';
}

void cmd_run(const RunOptions& o, std::ostream& log) {
  const auto start = Clock::now();
  const auto dest = dir_destination(o.out);
  const auto data = load_data(o.data, o.seed);
  const Dataset& ds = data.ds;

  AlternationConfig cfg{o.n_a, o.n_b, 1, make_policy(o.swap)};
  if (o.n_a < 0 || o.n_b < 0 || o.n_a + o.n_b < 1) throw ConfigError("need --na, --nb >= 0 with --na + --nb >= 1");

  auto s = init_state(ds, o.K, split_seed(o.seed, {0}));
  Rng rng(split_seed(o.seed, {1}));

  std::string trace = "iter,cost,balance\n";
  auto trace_row = [&](std::size_t it, const ClusterState& st) {
    trace += std::to_string(it) + ',' + format_real(clustering_cost(ds, st)) + ',' +
             format_real(overall_balance(st).value) + '\n';
  };
  trace_row(0, s);
  for (std::size_t it = 1; it <= o.iters; ++it) {
    safairkm_run(ds, s, cfg, rng, it - 1);
    trace_row(it, s);
  }

  const double cost = clustering_cost(ds, s);
  const double balance = overall_balance(s).value;
  OutputSet outputs;
  outputs.add("labels.txt", labels_text(s.labels));
  outputs.add("trace.csv", std::move(trace));
  if (o.gnuplot)
    outputs.add("trace.gp",
                "set datafile separator ','\n"
                "set xlabel 'iteration'\n"
                "set y2tics\n"
                "set ylabel 'cost'\n"
                "set y2label 'balance'\n"
                "plot 'trace.csv' skip 1 using 1:2 with lines title 'cost', \\\n"
                "     'trace.csv' skip 1 using 1:3 axes x1y2 with lines title 'balance'\n"
                "pause mouse close\n");
  publish(dest, outputs, make_manifest("run", o, data.info, o.seed, seconds_since(start), outputs));

  log << "final cost " << format_real(cost) << ", balance " << format_real(balance) << " after " << o.iters
      << " iterations of (n_a, n_b) = (" << o.n_a << ", " << o.n_b << "); outputs in " << o.out << '\n';
}

void cmd_pareto(const ParetoOptions& o, std::ostream& log) {
  const auto start = Clock::now();
  const auto dest = dir_destination(o.out);
  const auto data = load_data(o.data, o.seed);
  const Dataset& ds = data.ds;

  ParetoConfig cfg;
  cfg.K = o.K;
  cfg.pairs = o.pairs;
  cfg.initial_labelings = o.initial;
  cfg.q = o.q;
  cfg.budget = o.budget;
  cfg.max_iter = o.max_iter;
  cfg.master_seed = o.seed;
  cfg.policy = make_policy(o.swap);
  cfg.dedupe_eps = o.dedupe_eps;
  cfg.prune = o.strict_prune ? Dominance::Strict : Dominance::Weak;
  cfg.threads = resolve_threads(o.threads);
  if (o.dedupe_eps < 0) throw ConfigError("--dedupe-eps must be >= 0");

  const auto archive = pareto_front_run(ds, cfg);
  const auto front = trade_off_curve(archive.points);

  OutputSet outputs;
  std::string csv = "cost,balance,n_a,n_b,seed,iteration,label_file\n";
  for (std::size_t i = 0; i < front.size(); ++i) {
    std::ostringstream name;
    name << "labels/point_" << std::setw(4) << std::setfill('0') << i << ".txt";
    const auto& p = front[i];
    csv += format_real(p.cost) + ',' + format_real(p.balance) + ',' + std::to_string(p.provenance.n_a) + ',' +
           std::to_string(p.provenance.n_b) + ',' + std::to_string(p.provenance.seed) + ',' +
           std::to_string(p.provenance.iteration) + ',' + name.str() + '\n';
    outputs.add(name.str(), labels_text(p.unpacked_labels()));
  }
  outputs.add("front.csv", std::move(csv));

  std::string history = "iteration,merged,kept\n";
  for (const auto& h : archive.history)
    history += std::to_string(h.iteration) + ',' + std::to_string(h.merged) + ',' + std::to_string(h.kept) + '\n';
  outputs.add("history.csv", std::move(history));

  if (o.gnuplot)
    outputs.add("front.gp",
                "set datafile separator ','\n"
                "set xlabel 'clustering cost'\n"
                "set ylabel 'clustering balance'\n"
                "plot 'front.csv' skip 1 using 1:2 with linespoints pt 7 title 'front'\n"
                "pause mouse close\n");

  json manifest = make_manifest("pareto", o, data.info, o.seed, seconds_since(start), outputs);
  manifest["archive"] = {{"size", archive.points.size()},
                         {"front_size", front.size()},
                         {"iterations", archive.iterations},
                         {"budget", archive.budget}};
  publish(dest, outputs, manifest);

  log << "archive of " << archive.points.size() << " points after " << archive.iterations << " iterations; front of "
      << front.size() << " points";
  if (!front.empty())
    log << " spanning balance " << format_real(front.front().balance) << " .. " << format_real(front.back().balance)
        << " and cost " << format_real(front.front().cost) << " .. " << format_real(front.back().cost);
  log << "; outputs in " << o.out << '\n';
}

void cmd_sa2gd(const Sa2gdOptions& o, std::ostream& log) {
  const auto start = Clock::now();
  const auto dest = dir_destination(o.out);
  const auto problem = problem_preset(o.problem, o.sigma);
  const Vector<double> x0 = Vector<double>::Constant(problem.dim, 3.0);

  RateExperimentConfig cfg;
  cfg.n_a = o.n_a;
  cfg.n_b = o.n_b;
  cfg.horizons = o.horizons;
  cfg.seeds = o.seeds;
  cfg.master_seed = o.seed;
  cfg.threads = resolve_threads(o.threads);
  const auto exp = rate_experiment(problem, x0, cfg);

  // Noiseless run to the longest horizon: the converged point for this (n_a, n_b).
  const auto quiet = problem_preset(o.problem, 0.0);
  const std::size_t T_max = *std::max_element(o.horizons.begin(), o.horizons.end());
  const auto noiseless = sa2gd_run(quiet, x0, o.n_a, o.n_b, T_max, StepSchedule::diminishing(exp.c), 0);
  const Vector<double> x_T = noiseless.final_iterate();
  const double distance = (x_T - exp.x_star).norm();

  std::string csv = "T,seed,min_gap\n";
  for (const auto& r : exp.rows) csv += std::to_string(r.T) + ',' + std::to_string(r.seed) + ',' + format_real(r.min_gap) + '\n';

  auto to_vec = [](const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json averaged = json::array();
  for (const auto& [T, gap] : exp.averaged) averaged.push_back({{"T", T}, {"min_gap", gap}});
  json summary = {{"problem", o.problem},
                  {"n_a", o.n_a},
                  {"n_b", o.n_b},
                  {"lambda", exp.lambda},
                  {"c", exp.c},
                  {"sigma", o.sigma},
                  {"seeds", o.seeds},
                  {"averaged", averaged},
                  {"slope", exp.fit.slope},
                  {"intercept", exp.fit.intercept},
                  {"slope_stderr", exp.fit.slope_stderr},
                  {"ci95", {exp.fit.ci_low, exp.fit.ci_high}},
                  {"used_T", exp.fit.used_T},
                  {"excluded_T", exp.fit.excluded_T},
                  {"x_star", to_vec(exp.x_star)},
                  {"noiseless", {{"T", T_max}, {"x_T", to_vec(x_T)}, {"distance_to_x_star", distance}}}};

  OutputSet outputs;
  outputs.add("rate.csv", std::move(csv));
  outputs.add("summary.json", summary.dump(2) + "\n");
  publish(dest, outputs, make_manifest("sa2gd", o, nullptr, o.seed, seconds_since(start), outputs));

  for (auto T : exp.fit.excluded_T) log << "warning: T = " << T << " reached a zero gap and was left out of the fit\n";
  log << "slope " << format_real(exp.fit.slope) << " (95% CI " << format_real(exp.fit.ci_low) << " .. "
      << format_real(exp.fit.ci_high) << ") over " << exp.fit.used_T.size() << " horizons, lambda* = "
      << format_real(exp.lambda) << '\n';
  log << "x*(lambda*) = (";
  for (Eigen::Index i = 0; i < exp.x_star.size(); ++i) log << (i ? ", " : "") << format_real(exp.x_star[i]);
  log << "); noiseless x_T at T = " << T_max << " = (";
  for (Eigen::Index i = 0; i < x_T.size(); ++i) log << (i ? ", " : "") << format_real(x_T[i]);
  log << "), distance " << format_real(distance) << '\n';
}

bool cmd_verify(const std::string& manifest_path, unsigned threads, std::ostream& log) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DataError("manifest '" + manifest_path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("command") || !m.contains("config") || !m.contains("outputs"))
    throw DataError("manifest '" + manifest_path + "' lacks command, config or outputs");
  const std::string command = m.at("command").get<std::string>();
  const fs::path base = fs::path(manifest_path).parent_path();

  const auto& dataset = m["dataset"];
  if (dataset.is_object() && dataset.contains("fnv1a64")) {
    const auto path = dataset.contains("path") ? dataset["path"] : dataset["spec_file"];
    const auto now = hex64(fnv1a64(read_file(path.get<std::string>())));
    if (now != dataset["fnv1a64"].get<std::string>())
      throw DataError("input '" + path.get<std::string>() + "' changed since the manifest was written");
  }

  static int counter = 0;
  const fs::path scratch =
      fs::temp_directory_path() / ("fairkm-verify-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(scratch);
  std::ostringstream quiet;
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{scratch};

  const auto& config = m.at("config");
  if (command == "gen-data") {
    auto o = config.get<GenDataOptions>();
    o.out = (scratch / fs::path(o.out).filename()).string();
    fs::create_directories(scratch);
    cmd_gen_data(o, quiet);
  } else if (command == "run") {
    auto o = config.get<RunOptions>();
    o.out = scratch.string();
    cmd_run(o, quiet);
  } else if (command == "pareto") {
    auto o = config.get<ParetoOptions>();
    o.out = scratch.string();
    if (threads > 0) o.threads = threads;
    cmd_pareto(o, quiet);
  } else if (command == "sa2gd") {
    auto o = config.get<Sa2gdOptions>();
    o.out = scratch.string();
    if (threads > 0) o.threads = threads;
    cmd_sa2gd(o, quiet);
  } else {
    throw DataError("manifest names unknown command '" + command + "'");
  }

  bool ok = true;
  std::size_t checked = 0;
  for (const auto& entry : m.at("outputs")) {
    const auto rel = entry.at("path").get<std::string>();
    const fs::path original = base / rel;
    const fs::path fresh = scratch / rel;
    if (!fs::exists(original)) {
      log << "MISSING  " << rel << " (recorded output not found)\n";
      ok = false;
      continue;
    }
    if (!fs::exists(fresh)) {
      log << "MISSING  " << rel << " (not produced by the re-run)\n";
      ok = false;
      continue;
    }
    const bool same = read_file(original) == read_file(fresh);
    if (!same) {
      log << "DIFFERS  " << rel << '\n';
      ok = false;
    }
    ++checked;
  }
  log << (ok ? "verified " : "verification failed: ") << checked << " of " << m.at("outputs").size()
      << " outputs reproduced byte-for-byte\n";
  return ok;
}

}  // namespace fairkm::cli
