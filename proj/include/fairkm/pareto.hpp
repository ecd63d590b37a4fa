#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "fairkm/fair_swap.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/parallel.hpp"
#include "fairkm/random.hpp"

namespace fairkm {

// One SAfairKM schedule: per iteration, a k-means mini-batch of n_a points
// followed by n_b swap updates, repeated q times.
struct AlternationConfig {
  int n_a = 1;
  int n_b = 1;
  int q = 1;
  SwapPolicy policy;
};

template <typename Scalar>
using IterationObserver = std::function<void(std::size_t iteration, const BasicClusterState<Scalar>&)>;

// Advances `s` by config.q iterations. Iteration numbers passed to the swap
// policy and the observer start at first_iteration + 1.
template <typename Scalar>
void safairkm_run(const BasicDataset<Scalar>& ds, BasicClusterState<Scalar>& s, const AlternationConfig& config,
                  Rng& rng, std::size_t first_iteration = 0, const IterationObserver<Scalar>& observer = {}) {
  if (config.n_a < 0 || config.n_b < 0 || config.q < 0) throw ConfigError("n_a, n_b and q must be nonnegative");
  for (int it = 0; it < config.q; ++it) {
    const std::size_t iteration = first_iteration + static_cast<std::size_t>(it) + 1;
    if (config.n_a > 0) minibatch_kmeans_step(ds, s, static_cast<std::size_t>(config.n_a), rng);
    for (int r = 0; r < config.n_b; ++r) swap_step(ds, s, config.policy, rng, iteration - 1);
    if (observer) observer(iteration, s);
  }
}

// Strict: q is removed only when some p has strictly lower cost and strictly
// higher balance. Weak: q is also removed when some p is at least as good in
// both objectives and better in one, so ties in either objective collapse.
enum class Dominance { Strict, Weak };

// Survivor indices of `points`, ordered by cost ascending, then balance
// descending, then input position. Exact (cost, balance) duplicates keep their
// earliest occurrence. With dedupe_eps > 0, survivors within eps of the
// previously kept survivor in both objectives are merged into it as well.
inline std::vector<std::size_t> nondominated_indices(const std::vector<ParetoPoint>& points, double dedupe_eps = 0.0,
                                                     Dominance mode = Dominance::Strict) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = points[a];
    const auto& pb = points[b];
    if (pa.cost != pb.cost) return pa.cost < pb.cost;
    if (pa.balance != pb.balance) return pa.balance > pb.balance;
    return a < b;
  });

  std::vector<std::size_t> kept;
  if (mode == Dominance::Weak) {
    double best = -std::numeric_limits<double>::infinity();
    for (auto i : order) {
      if (points[i].balance > best) {
        kept.push_back(i);
        best = points[i].balance;
      }
    }
  } else {
    double best_cheaper = -std::numeric_limits<double>::infinity();  // max balance at strictly lower cost
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t end = i;
      while (end < order.size() && points[order[end]].cost == points[order[i]].cost) ++end;
      for (std::size_t g = i; g < end; ++g) {
        const auto& p = points[order[g]];
        if (best_cheaper > p.balance) continue;
        if (g > i && points[order[g - 1]].balance == p.balance) continue;
        kept.push_back(order[g]);
      }
      best_cheaper = std::max(best_cheaper, points[order[i]].balance);
      i = end;
    }
  }

  if (dedupe_eps > 0.0 && !kept.empty()) {
    std::vector<std::size_t> merged{kept.front()};
    for (std::size_t k = 1; k < kept.size(); ++k) {
      const auto& last = points[merged.back()];
      const auto& p = points[kept[k]];
      if (std::abs(p.cost - last.cost) <= dedupe_eps && std::abs(p.balance - last.balance) <= dedupe_eps) continue;
      merged.push_back(kept[k]);
    }
    kept = std::move(merged);
  }
  return kept;
}

inline std::vector<ParetoPoint> filter_nondominated(std::vector<ParetoPoint> points, double dedupe_eps = 0.0,
                                                    Dominance mode = Dominance::Strict) {
  const auto idx = nondominated_indices(points, dedupe_eps, mode);
  std::vector<ParetoPoint> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(std::move(points[i]));
  return out;
}

// Weakly nondominated points: cost and balance both strictly increase along
// the returned sequence.
inline std::vector<ParetoPoint> trade_off_curve(const std::vector<ParetoPoint>& points) {
  return filter_nondominated(points, 0.0, Dominance::Weak);
}

struct ParetoConfig {
  int K = 2;
  std::vector<std::pair<int, int>> pairs{{4, 0}, {3, 1}, {1, 3}, {0, 4}};
  std::size_t initial_labelings = 10;
  int q = 1;
  std::size_t budget = 1500;
  std::size_t max_iter = 400;
  std::uint64_t master_seed = 0;
  SwapPolicy policy;
  double dedupe_eps = 0.0;
  Dominance prune = Dominance::Weak;
  unsigned threads = 1;
};

struct PruneRecord {
  std::size_t iteration = 0;
  std::size_t merged = 0;  // archive + children before pruning
  std::size_t kept = 0;
};

struct FrontArchive {
  std::vector<ParetoPoint> points;
  std::size_t budget = 0;
  std::size_t iterations = 0;  // outer iterations completed
  std::uint64_t master_seed = 0;
  std::vector<PruneRecord> history;
};

inline std::uint64_t initial_labeling_seed(std::uint64_t master, std::size_t i) {
  return split_seed(master, {0, static_cast<std::uint64_t>(i)});
}

inline std::uint64_t child_seed(std::uint64_t master, std::size_t labeling, std::size_t pair, std::size_t iteration) {
  return split_seed(master, {1, static_cast<std::uint64_t>(labeling), static_cast<std::uint64_t>(pair),
                             static_cast<std::uint64_t>(iteration)});
}

// Called after every prune with the archive just formed.
using ArchiveObserver = std::function<void(std::size_t iteration, const std::vector<ParetoPoint>& merged,
                                           const std::vector<ParetoPoint>& archive)>;

// List-update Pareto search. Each outer iteration fans every archived labelling
// out under every (n_a, n_b) pair for q SAfairKM iterations, appends the
// children after the current archive and prunes once. Every child owns the
// stream child_seed(master, labelling, pair, iteration) and a private state,
// so the result does not depend on the thread count.
template <typename Scalar>
FrontArchive pareto_front_run(const BasicDataset<Scalar>& ds, const ParetoConfig& cfg,
                              const ArchiveObserver& observer = {}) {
  if (cfg.pairs.empty()) throw ConfigError("the pair set W must not be empty");
  if (cfg.initial_labelings == 0) throw ConfigError("at least one initial labelling is required");
  if (cfg.K > 256) throw ConfigError("K must be <= 256");
  for (const auto& [na, nb] : cfg.pairs)
    if (na < 0 || nb < 0 || na + nb < 1) throw ConfigError("each pair needs n_a, n_b >= 0 and n_a + n_b >= 1");

  FrontArchive archive;
  archive.budget = cfg.budget;
  archive.master_seed = cfg.master_seed;

  std::vector<ParetoPoint> initial(cfg.initial_labelings);
  parallel_for(initial.size(), cfg.threads, [&](std::size_t i) {
    const auto seed = initial_labeling_seed(cfg.master_seed, i);
    const auto s = init_state(ds, cfg.K, seed);
    initial[i] = evaluate(ds, s.labels, cfg.K, Provenance{seed, 0, 0, 0});
  });
  archive.points = filter_nondominated(std::move(initial), cfg.dedupe_eps, cfg.prune);

  const std::size_t P = cfg.pairs.size();
  for (std::size_t t = 1; t <= cfg.max_iter && archive.points.size() <= cfg.budget; ++t) {
    const std::size_t L = archive.points.size();
    std::vector<ParetoPoint> merged(L + L * P);
    parallel_for(L * P, cfg.threads, [&](std::size_t task) {
      const std::size_t i = task / P;
      const std::size_t w = task % P;
      const auto seed = child_seed(cfg.master_seed, i, w, t);
      AlternationConfig alt{cfg.pairs[w].first, cfg.pairs[w].second, cfg.q, cfg.policy};
      auto s = state_from_labels(ds, archive.points[i].unpacked_labels(), cfg.K);
      Rng rng(seed);
      safairkm_run(ds, s, alt, rng, (t - 1) * static_cast<std::size_t>(cfg.q));
      merged[L + task] = evaluate(ds, s.labels, cfg.K, Provenance{seed, alt.n_a, alt.n_b, static_cast<int>(t)});
    });
    std::move(archive.points.begin(), archive.points.end(), merged.begin());

    auto kept = nondominated_indices(merged, cfg.dedupe_eps, cfg.prune);
    std::vector<ParetoPoint> next;
    next.reserve(kept.size());
    for (auto i : kept) next.push_back(merged[i]);
    archive.history.push_back({t, merged.size(), next.size()});
    if (observer) observer(t, merged, next);
    archive.points = std::move(next);
    archive.iterations = t;
  }
  return archive;
}

}  // namespace fairkm
