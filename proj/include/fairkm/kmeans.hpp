#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"

namespace fairkm {

struct KmeansStepReport {
  std::size_t points_moved = 0;
  std::size_t batch_size = 0;
};

// m distinct indices from [0, n), in draw order.
inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t m) {
  if (m >= n) m = n;
  if (m * 4 < n) {
    std::vector<std::size_t> out;
    out.reserve(m);
    while (out.size() < m) {
      const auto i = rng.index(n);
      if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
    }
    return out;
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return rng.sample(std::move(all), m);
}

// argmin_k ||x - c_k||^2, lowest index on ties.
template <typename Scalar, typename Derived>
int closest_center(const Eigen::MatrixBase<Derived>& x, const RowMatrix<Scalar>& centroids) {
  int best = 0;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    const Scalar dist = (centroids.row(k) - x.derived()).squaredNorm();
    if (dist < best_d) {
      best_d = dist;
      best = static_cast<int>(k);
    }
  }
  return best;
}

// Uniform random labels, then empty clusters are filled by relabelling random
// points drawn from clusters that can spare one.
template <typename Scalar>
BasicClusterState<Scalar> init_state(const BasicDataset<Scalar>& ds, int K, std::uint64_t seed) {
  if (K < 2) throw ConfigError("K must be >= 2");
  if (static_cast<std::size_t>(K) > ds.size())
    throw ConfigError("K = " + std::to_string(K) + " exceeds the number of points N = " + std::to_string(ds.size()));
  if (ds.groups() < 2) throw DataError("J must be >= 2");

  Rng rng(seed);
  Labels labels(ds.size());
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(K), 0);
  for (auto& l : labels) {
    l = static_cast<int>(rng.index(static_cast<std::size_t>(K)));
    ++sizes[static_cast<std::size_t>(l)];
  }
  for (int k = 0; k < K; ++k) {
    if (sizes[static_cast<std::size_t>(k)] > 0) continue;
    for (;;) {
      const auto p = rng.index(ds.size());
      auto& from = sizes[static_cast<std::size_t>(labels[p])];
      if (from < 2) continue;
      --from;
      labels[p] = k;
      sizes[static_cast<std::size_t>(k)] = 1;
      break;
    }
  }
  return state_from_labels(ds, std::move(labels), K);
}

namespace detail {

template <typename Scalar>
void move_point(const BasicDataset<Scalar>& ds, BasicClusterState<Scalar>& s, std::size_t p, int to) {
  const int from = s.labels[p];
  const int g = ds.group_of[p];
  --s.counts[from];
  --s.group_counts(from, g);
  ++s.counts[to];
  ++s.group_counts(to, g);
  s.labels[p] = to;
}

}  // namespace detail

// Refills every empty cluster with the point of the largest cluster that lies
// farthest from that cluster's centroid. Returns the number of repairs.
template <typename Scalar>
int repair_empty_clusters(const BasicDataset<Scalar>& ds, BasicClusterState<Scalar>& s) {
  int repairs = 0;
  for (int k = 0; k < s.clusters(); ++k) {
    if (s.counts[k] > 0) continue;
    Eigen::Index donor = 0;
    s.counts.maxCoeff(&donor);
    std::size_t far = 0;
    Scalar far_d = -1;
    for (std::size_t p = 0; p < s.labels.size(); ++p) {
      if (s.labels[p] != donor) continue;
      const Scalar dist = (ds.points.row(static_cast<Eigen::Index>(p)) - s.centroids.row(donor)).squaredNorm();
      if (dist > far_d) {
        far_d = dist;
        far = p;
      }
    }
    detail::move_point(ds, s, far, k);
    s.centroids.row(k) = ds.points.row(static_cast<Eigen::Index>(far));
    s.lifetime[k] = 1;
    ++repairs;
  }
  return repairs;
}

// One mini-batch pass: every sampled point joins its closest centre, and the
// receiving centre takes a streaming step c += (x - c) / N with its lifetime
// counter N incremented first. Donor centres are not pulled back.
template <typename Scalar>
KmeansStepReport minibatch_kmeans_step(const BasicDataset<Scalar>& ds, BasicClusterState<Scalar>& s,
                                       std::size_t n_a, Rng& rng) {
  KmeansStepReport report;
  const auto batch = sample_indices(rng, ds.size(), n_a);
  report.batch_size = batch.size();
  for (auto p : batch) {
    const auto x = ds.points.row(static_cast<Eigen::Index>(p));
    const int k = closest_center<Scalar>(x, s.centroids);
    if (k != s.labels[p]) {
      detail::move_point(ds, s, p, k);
      ++report.points_moved;
    }
    ++s.lifetime[k];
    s.centroids.row(k) += (x - s.centroids.row(k)) / static_cast<Scalar>(s.lifetime[k]);
  }
  repair_empty_clusters(ds, s);
  return report;
}

// Replaces the streaming centroids with exact means of the current labels.
template <typename Scalar>
void exact_recenter(const BasicDataset<Scalar>& ds, BasicClusterState<Scalar>& s) {
  s.centroids = exact_centroids(ds, s.labels, s.clusters());
}

}  // namespace fairkm
