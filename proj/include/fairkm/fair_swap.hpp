#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"

namespace fairkm {

enum class TargetMode { Global, Local };

// How the balance-improvement half picks its partner cluster and how many
// candidates it examines per side. With candidate_batch = 1 and no growth the
// swap draws one point per side uniformly at random.
struct SwapPolicy {
  TargetMode target = TargetMode::Local;
  std::size_t candidate_batch = 4;
  std::size_t batch_growth = 1;
  std::size_t growth_interval = 50;

  std::size_t candidates_at(std::size_t iteration) const {
    const std::size_t steps = growth_interval == 0 ? 0 : iteration / growth_interval;
    return candidate_batch + batch_growth * steps;
  }
};

// Target cluster h for bottleneck cluster l and critical pair (under, over).
//
// Global: the cluster whose (under, over) counts are most lopsided in either
// direction, a positive count over zero being +inf. Clusters holding neither
// group are never preferred. h = l is replaced by the best k != l, which is the
// same as ranking only k != l.
// Local: the cluster whose centroid is nearest to c_l.
template <typename Scalar>
int select_target_cluster(const BasicClusterState<Scalar>& s, int l, int under, int over, TargetMode mode) {
  const int K = s.clusters();
  int best = -1;
  if (mode == TargetMode::Global) {
    CountRatio best_score;
    bool best_empty = true;
    for (int k = 0; k < K; ++k) {
      if (k == l) continue;
      const auto a = s.group_counts(k, under);
      const auto b = s.group_counts(k, over);
      const bool empty = a == 0 && b == 0;
      const CountRatio score{std::max(a, b), std::min(a, b)};
      if (best < 0 || (best_empty && !empty) || (!empty && best_score < score)) {
        best = k;
        best_score = score;
        best_empty = empty;
      }
    }
  } else {
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (int k = 0; k < K; ++k) {
      if (k == l) continue;
      const Scalar dist = (s.centroids.row(k) - s.centroids.row(l)).squaredNorm();
      if (best < 0 || dist < best_d) {
        best = k;
        best_d = dist;
      }
    }
  }
  return best;
}

struct SwapReport {
  bool performed = false;
  std::size_t p = 0;        // left C_l (group `over`), joined C_h
  std::size_t p_prime = 0;  // left C_h (group `under`), joined C_l
  int l = 0;
  int h = 0;
  int under = 0;
  int over = 1;
  std::string reason;
};

namespace detail {

// Member of pool nearest to `target` among up to m uniformly drawn candidates;
// lowest point index on ties.
template <typename Scalar, typename Row>
std::size_t nearest_candidate(const BasicDataset<Scalar>& ds, std::vector<std::size_t> pool, std::size_t m,
                              const Row& target, Rng& rng) {
  if (m < pool.size()) pool = rng.sample(std::move(pool), m);
  std::size_t best = pool.front();
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (auto p : pool) {
    const Scalar dist = (ds.points.row(static_cast<Eigen::Index>(p)) - target).squaredNorm();
    if (dist < best_d || (dist == best_d && p < best)) {
      best_d = dist;
      best = p;
    }
  }
  return best;
}

}  // namespace detail

// One balance-improvement update. The bottleneck cluster C_l gives away a point
// of its over-represented group and receives a point of its under-represented
// group from C_h, so both cluster sizes are preserved and C_l's critical ratio
// a/b becomes (a+1)/(b-1). `iteration` drives the candidate-pool growth.
template <typename Scalar>
SwapReport swap_step(const BasicDataset<Scalar>& ds, BasicClusterState<Scalar>& s, const SwapPolicy& policy,
                     Rng& rng, std::size_t iteration = 0) {
  SwapReport r;
  const auto ob = overall_balance(s);
  r.l = ob.cluster;
  r.under = ob.under;
  r.over = ob.over;
  if (ob.ratio.num == ob.ratio.den) {
    r.reason = "already perfectly balanced";
    return r;
  }
  r.h = select_target_cluster(s, r.l, r.under, r.over, policy.target);

  std::vector<std::size_t> leaving, joining;
  for (std::size_t p = 0; p < s.labels.size(); ++p) {
    if (s.labels[p] == r.l && ds.group_of[p] == r.over) leaving.push_back(p);
    if (s.labels[p] == r.h && ds.group_of[p] == r.under) joining.push_back(p);
  }
  if (leaving.empty() || joining.empty()) {
    r.reason = "infeasible swap";
    return r;
  }

  const std::size_t m = std::max<std::size_t>(1, policy.candidates_at(iteration));
  r.p = detail::nearest_candidate(ds, std::move(leaving), m, s.centroids.row(r.h), rng);
  r.p_prime = detail::nearest_candidate(ds, std::move(joining), m, s.centroids.row(r.l), rng);

  s.labels[r.p] = r.h;
  s.labels[r.p_prime] = r.l;
  --s.group_counts(r.l, r.over);
  ++s.group_counts(r.l, r.under);
  --s.group_counts(r.h, r.under);
  ++s.group_counts(r.h, r.over);

  const auto x_in = ds.points.row(static_cast<Eigen::Index>(r.p_prime));
  const auto x_out = ds.points.row(static_cast<Eigen::Index>(r.p));
  s.centroids.row(r.l) += (x_in - s.centroids.row(r.l)) / static_cast<Scalar>(s.lifetime[r.l]);
  s.centroids.row(r.h) += (x_out - s.centroids.row(r.h)) / static_cast<Scalar>(s.lifetime[r.h]);
  r.performed = true;
  return r;
}

}  // namespace fairkm
