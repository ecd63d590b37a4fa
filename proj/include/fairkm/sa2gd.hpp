#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fairkm/parallel.hpp"
#include "fairkm/random.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

// Two smooth objectives with exact gradients; stochastic gradients add
// i.i.d. N(0, noise_sigma^2) to every coordinate. strong_convexity(lambda) and
// minimizer(lambda) describe S(., lambda) = lambda f_a + (1 - lambda) f_b when
// they are known in closed form.
template <typename Scalar>
struct BasicBiObjectiveProblem {
  using Vec = Vector<Scalar>;

  Eigen::Index dim = 0;
  std::function<Scalar(const Vec&)> f_a, f_b;
  std::function<Vec(const Vec&)> grad_a, grad_b;
  Scalar noise_sigma = 0;
  std::function<Scalar(Scalar)> strong_convexity;
  std::function<Vec(Scalar)> minimizer;

  Scalar weighted(const Vec& x, Scalar lambda) const { return lambda * f_a(x) + (1 - lambda) * f_b(x); }
};

using BiObjectiveProblem = BasicBiObjectiveProblem<double>;

// f_a = 1/2 (x-a)' D_a (x-a), f_b = 1/2 (x-b)' D_b (x-b) with diagonal D > 0.
// S(., lambda) has Hessian H = lambda D_a + (1-lambda) D_b, minimiser
// H^{-1}(lambda D_a a + (1-lambda) D_b b) and modulus min(diag H).
template <typename Scalar>
BasicBiObjectiveProblem<Scalar> make_quadratic_pair(const Vector<Scalar>& d_a, const Vector<Scalar>& a,
                                                    const Vector<Scalar>& d_b, const Vector<Scalar>& b,
                                                    Scalar noise_sigma) {
  const auto n = a.size();
  if (b.size() != n || d_a.size() != n || d_b.size() != n || n == 0)
    throw ConfigError("quadratic pair: dimension mismatch");
  if (!(d_a.array() > 0).all() || !(d_b.array() > 0).all())
    throw ConfigError("quadratic pair: curvatures must be positive");
  if (!(noise_sigma >= 0)) throw ConfigError("noise sigma must be >= 0");

  using Vec = Vector<Scalar>;
  BasicBiObjectiveProblem<Scalar> p;
  p.dim = n;
  p.noise_sigma = noise_sigma;
  p.f_a = [=](const Vec& x) { return Scalar(0.5) * (d_a.array() * (x - a).array().square()).sum(); };
  p.f_b = [=](const Vec& x) { return Scalar(0.5) * (d_b.array() * (x - b).array().square()).sum(); };
  p.grad_a = [=](const Vec& x) -> Vec { return d_a.cwiseProduct(x - a); };
  p.grad_b = [=](const Vec& x) -> Vec { return d_b.cwiseProduct(x - b); };
  p.strong_convexity = [=](Scalar lambda) { return (lambda * d_a + (1 - lambda) * d_b).minCoeff(); };
  p.minimizer = [=](Scalar lambda) -> Vec {
    const Vec h = lambda * d_a + (1 - lambda) * d_b;
    return (lambda * d_a.cwiseProduct(a) + (1 - lambda) * d_b.cwiseProduct(b)).cwiseQuotient(h);
  };
  return p;
}

// Built-in problems: "quadratic" (anisotropic, 2-D) and "isotropic" (D = I).
inline BiObjectiveProblem problem_preset(const std::string& name, double noise_sigma) {
  Vector<double> a(2), b(2), da(2), db(2);
  a << 1.0, -1.0;
  b << -1.0, 2.0;
  if (name == "quadratic") {
    da << 1.0, 2.0;
    db << 2.0, 1.0;
  } else if (name == "isotropic") {
    da << 1.0, 1.0;
    db << 1.0, 1.0;
  } else {
    throw ConfigError("unknown problem preset '" + name + "'; valid presets: quadratic isotropic");
  }
  return make_quadratic_pair(da, a, db, b, noise_sigma);
}

enum class ScheduleKind { Diminishing, Constant };

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::Diminishing;
  double c = 1.0;         // strong-convexity modulus of the weighted sum
  double constant = 0.0;  // step for ScheduleKind::Constant

  // alpha_t = 2 / (c (t + 1) (n_a + n_b)) for t >= 0.
  double at(std::size_t t, int n_total) const {
    if (kind == ScheduleKind::Constant) return constant;
    return 2.0 / (c * static_cast<double>(t + 1) * static_cast<double>(n_total));
  }

  static StepSchedule diminishing(double c) { return {ScheduleKind::Diminishing, c, 0.0}; }
  static StepSchedule fixed(double step) { return {ScheduleKind::Constant, 1.0, step}; }
};

// Stochastic gradient source with per-objective call counters.
template <typename Scalar>
class GradientOracle {
 public:
  using Vec = Vector<Scalar>;

  GradientOracle(const BasicBiObjectiveProblem<Scalar>& problem, std::uint64_t seed)
      : problem_(problem), rng_(seed) {}

  Vec sample_a(const Vec& x) {
    ++calls_a_;
    return perturb(problem_.grad_a(x));
  }
  Vec sample_b(const Vec& x) {
    ++calls_b_;
    return perturb(problem_.grad_b(x));
  }

  std::size_t calls_a() const { return calls_a_; }
  std::size_t calls_b() const { return calls_b_; }

 private:
  Vec perturb(Vec g) {
    if (problem_.noise_sigma > 0)
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += problem_.noise_sigma * static_cast<Scalar>(rng_.normal());
    return g;
  }

  const BasicBiObjectiveProblem<Scalar>& problem_;
  Rng rng_;
  std::size_t calls_a_ = 0;
  std::size_t calls_b_ = 0;
};

template <typename Scalar>
struct BasicTrajectory {
  RowMatrix<Scalar> iterates;  // (T + 1) x n, row t = x_t
  Vector<Scalar> gaps;         // S(x_t, lambda*) - S(x*, lambda*) when x* is known, else empty
  Scalar lambda = 0;           // n_a / (n_a + n_b)
  std::size_t calls_a = 0;
  std::size_t calls_b = 0;

  Vector<Scalar> final_iterate() const { return iterates.row(iterates.rows() - 1).transpose(); }
};

using Trajectory = BasicTrajectory<double>;

// S(x, lambda) - S(x*(lambda), lambda), clamped at zero.
template <typename Scalar>
Scalar weighted_gap(const BasicBiObjectiveProblem<Scalar>& problem, const Vector<Scalar>& x, Scalar lambda) {
  if (!problem.minimizer) throw ConfigError("weighted gap needs the closed-form minimiser x*(lambda)");
  const Vector<Scalar> xs = problem.minimizer(lambda);
  return std::max(Scalar(0), problem.weighted(x, lambda) - problem.weighted(xs, lambda));
}

// T outer iterations; each runs n_a stochastic steps on f_a, then n_b on f_b,
// all with the step alpha_t, and x_{t+1} is the end of the f_b chain.
template <typename Scalar>
BasicTrajectory<Scalar> sa2gd_run(const BasicBiObjectiveProblem<Scalar>& problem, const Vector<Scalar>& x0, int n_a,
                                  int n_b, std::size_t T, const StepSchedule& schedule, std::uint64_t seed) {
  if (n_a < 0 || n_b < 0 || n_a + n_b < 1) throw ConfigError("need n_a, n_b >= 0 and n_a + n_b >= 1");
  if (T < 1) throw ConfigError("T must be >= 1");
  if (x0.size() != problem.dim) throw ConfigError("x0 has the wrong dimension");

  BasicTrajectory<Scalar> tr;
  const int n_total = n_a + n_b;
  tr.lambda = static_cast<Scalar>(n_a) / static_cast<Scalar>(n_total);
  tr.iterates.resize(static_cast<Eigen::Index>(T + 1), problem.dim);
  tr.iterates.row(0) = x0.transpose();

  std::optional<Scalar> s_star;
  if (problem.minimizer) {
    s_star = problem.weighted(problem.minimizer(tr.lambda), tr.lambda);
    tr.gaps.resize(static_cast<Eigen::Index>(T + 1));
    tr.gaps[0] = std::max(Scalar(0), problem.weighted(x0, tr.lambda) - *s_star);
  }

  GradientOracle<Scalar> oracle(problem, seed);
  Vector<Scalar> y = x0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto alpha = static_cast<Scalar>(schedule.at(t, n_total));
    for (int r = 0; r < n_a; ++r) y -= alpha * oracle.sample_a(y);
    for (int r = 0; r < n_b; ++r) y -= alpha * oracle.sample_b(y);
    if (!y.allFinite())
      throw DivergenceError("SA2GD iterate became non-finite at outer iteration " + std::to_string(t + 1) +
                            " (step size " + std::to_string(static_cast<double>(alpha)) +
                            "); the step is too large for the problem's curvature");
    tr.iterates.row(static_cast<Eigen::Index>(t + 1)) = y.transpose();
    if (s_star) tr.gaps[static_cast<Eigen::Index>(t + 1)] = std::max(Scalar(0), problem.weighted(y, tr.lambda) - *s_star);
  }
  tr.calls_a = oracle.calls_a();
  tr.calls_b = oracle.calls_b();
  return tr;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;  // 95% interval on the slope
  double ci_high = 0.0;
  std::vector<std::size_t> used_T;
  std::vector<std::size_t> excluded_T;  // zero gaps (exact convergence)
};

namespace detail {

// Two-sided 95% Student-t quantiles for df = 1..30; normal beyond.
inline double t975(std::size_t df) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df == 0) return std::numeric_limits<double>::infinity();
  return df <= 30 ? table[df - 1] : 1.960;
}

}  // namespace detail

// Least-squares slope of log(gap) against log(T).
inline RateFit rate_fit(const std::vector<std::pair<std::size_t, double>>& runs) {
  std::set<std::size_t> distinct;
  for (const auto& r : runs) distinct.insert(r.first);
  if (distinct.size() < 4) throw ConfigError("rate fit needs at least 4 distinct T values");

  RateFit fit;
  std::vector<double> xs, ys;
  for (const auto& [T, gap] : runs) {
    if (!(gap > 0.0) || T == 0) {
      fit.excluded_T.push_back(T);
      continue;
    }
    fit.used_T.push_back(T);
    xs.push_back(std::log(static_cast<double>(T)));
    ys.push_back(std::log(gap));
  }
  if (xs.size() < 2) throw ConfigError("rate fit needs at least two positive gaps");

  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  A.col(0).setOnes();
  A.col(1) = Eigen::Map<const Eigen::VectorXd>(xs.data(), n);
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
  fit.intercept = beta[0];
  fit.slope = beta[1];
  if (n > 2) {
    const double rss = (y - A * beta).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - 2);
    const double sxx = (A.col(1).array() - A.col(1).mean()).square().sum();
    fit.slope_stderr = std::sqrt(sigma2 / sxx);
  }
  const double half = detail::t975(static_cast<std::size_t>(std::max<Eigen::Index>(n - 2, 0))) * fit.slope_stderr;
  fit.ci_low = fit.slope - half;
  fit.ci_high = fit.slope + half;
  return fit;
}

struct RateExperimentConfig {
  int n_a = 1;
  int n_b = 1;
  std::vector<std::size_t> horizons{100, 316, 1000, 3162, 10000};
  std::size_t seeds = 20;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
};

struct RateExperiment {
  struct Row {
    std::size_t T;
    std::size_t seed_index;
    std::uint64_t seed;
    double min_gap;  // min over t = 1..T of this seed's gap
  };
  std::vector<Row> rows;
  std::vector<std::pair<std::size_t, double>> averaged;  // (T, min over t <= T of the seed-averaged gap)
  RateFit fit;
  Vector<double> x_star;
  double lambda = 0.0;
  double c = 0.0;
};

// Every seed runs once to the largest horizon under the diminishing schedule;
// the schedule does not depend on T, so shorter horizons are prefixes.
inline RateExperiment rate_experiment(const BiObjectiveProblem& problem, const Vector<double>& x0,
                                      const RateExperimentConfig& cfg) {
  if (cfg.horizons.empty()) throw ConfigError("no horizons given");
  for (auto T : cfg.horizons)
    if (T == 0) throw ConfigError("horizons must be >= 1");
  if (cfg.seeds == 0) throw ConfigError("need at least one seed");
  if (!problem.minimizer || !problem.strong_convexity)
    throw ConfigError("rate experiment needs x*(lambda) and the strong-convexity modulus");

  RateExperiment out;
  const std::size_t T_max = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  const int n_total = cfg.n_a + cfg.n_b;
  if (cfg.n_a < 0 || cfg.n_b < 0 || n_total < 1) throw ConfigError("need n_a, n_b >= 0 and n_a + n_b >= 1");
  out.lambda = static_cast<double>(cfg.n_a) / static_cast<double>(n_total);
  out.c = problem.strong_convexity(out.lambda);
  out.x_star = problem.minimizer(out.lambda);
  const auto schedule = StepSchedule::diminishing(out.c);

  std::vector<Vector<double>> gaps(cfg.seeds);
  std::vector<std::uint64_t> seeds(cfg.seeds);
  parallel_for(cfg.seeds, cfg.threads, [&](std::size_t i) {
    seeds[i] = split_seed(cfg.master_seed, {2, static_cast<std::uint64_t>(i)});
    gaps[i] = sa2gd_run(problem, x0, cfg.n_a, cfg.n_b, T_max, schedule, seeds[i]).gaps;
  });

  for (auto T : cfg.horizons) {
    for (std::size_t i = 0; i < cfg.seeds; ++i)
      out.rows.push_back({T, i, seeds[i], gaps[i].segment(1, static_cast<Eigen::Index>(T)).minCoeff()});
  }
  Vector<double> mean = Vector<double>::Zero(static_cast<Eigen::Index>(T_max + 1));
  for (const auto& g : gaps) mean += g;
  mean /= static_cast<double>(cfg.seeds);
  for (auto T : cfg.horizons) out.averaged.emplace_back(T, mean.segment(1, static_cast<Eigen::Index>(T)).minCoeff());
  out.fit = rate_fit(out.averaged);
  return out;
}

}  // namespace fairkm
