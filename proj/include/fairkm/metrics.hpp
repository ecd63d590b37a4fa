#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

// Assignment plus the tallies the alternating updates maintain incrementally.
//
//   counts(k)          = |C_k|
//   group_counts(k, j) = |C_k ∩ V_j|
//   lifetime(k)        = streaming-rate counter; starts at |C_k| and only grows
//
// centroids are streaming estimates and may drift from the exact cluster means;
// the objectives below always recompute exact means from the labels.
template <typename Scalar>
struct BasicClusterState {
  Labels labels;
  RowMatrix<Scalar> centroids;  // K x d
  CountVector counts;           // K
  CountMatrix group_counts;     // K x J
  CountVector lifetime;         // K

  int clusters() const { return static_cast<int>(centroids.rows()); }

  friend bool operator==(const BasicClusterState& a, const BasicClusterState& b) {
    return a.labels == b.labels && a.centroids.rows() == b.centroids.rows() &&
           a.centroids.cols() == b.centroids.cols() && a.centroids == b.centroids && a.counts == b.counts &&
           a.group_counts == b.group_counts && a.lifetime == b.lifetime;
  }
};

using ClusterState = BasicClusterState<double>;

// Exact per-cluster means of the labelled points.
template <typename Scalar>
RowMatrix<Scalar> exact_centroids(const BasicDataset<Scalar>& ds, const Labels& labels, int K) {
  RowMatrix<Scalar> sums = RowMatrix<Scalar>::Zero(K, ds.points.cols());
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(K), 0);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    sums.row(labels[p]) += ds.points.row(static_cast<Eigen::Index>(p));
    ++sizes[static_cast<std::size_t>(labels[p])];
  }
  for (int k = 0; k < K; ++k) {
    if (sizes[static_cast<std::size_t>(k)] == 0)
      throw DegenerateClusterError("cluster " + std::to_string(k) + " is empty");
    sums.row(k) /= static_cast<Scalar>(sizes[static_cast<std::size_t>(k)]);
  }
  return sums;
}

// Builds a consistent state from a labelling: exact centroids, lifetime = sizes.
template <typename Scalar>
BasicClusterState<Scalar> state_from_labels(const BasicDataset<Scalar>& ds, Labels labels, int K) {
  if (labels.size() != ds.size()) throw DataError("label count does not match dataset size");
  BasicClusterState<Scalar> s;
  s.counts = CountVector::Zero(K);
  s.group_counts = CountMatrix::Zero(K, static_cast<Eigen::Index>(ds.groups()));
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int k = labels[p];
    if (k < 0 || k >= K) throw DataError("label " + std::to_string(k) + " outside [0, K)");
    ++s.counts[k];
    ++s.group_counts(k, ds.group_of[p]);
  }
  s.centroids = exact_centroids(ds, labels, K);
  s.lifetime = s.counts;
  s.labels = std::move(labels);
  return s;
}

// True when counts and group_counts match a fresh tally of the labels.
template <typename Scalar>
bool tallies_consistent(const BasicDataset<Scalar>& ds, const BasicClusterState<Scalar>& s) {
  const int K = s.clusters();
  if (s.labels.size() != ds.size() || s.counts.size() != K || s.group_counts.rows() != K ||
      s.group_counts.cols() != static_cast<Eigen::Index>(ds.groups()))
    return false;
  CountMatrix g = CountMatrix::Zero(K, static_cast<Eigen::Index>(ds.groups()));
  for (std::size_t p = 0; p < s.labels.size(); ++p) {
    if (s.labels[p] < 0 || s.labels[p] >= K) return false;
    ++g(s.labels[p], ds.group_of[p]);
  }
  return g == s.group_counts && CountVector(g.rowwise().sum()) == s.counts;
}

// f1: mean squared distance of each point to the exact mean of its cluster.
template <typename Scalar>
double clustering_cost(const BasicDataset<Scalar>& ds, const Labels& labels, int K) {
  const auto centroids = exact_centroids(ds, labels, K);
  double total = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p)
    total += static_cast<double>((ds.points.row(static_cast<Eigen::Index>(p)) - centroids.row(labels[p])).squaredNorm());
  return total / static_cast<double>(ds.size());
}

template <typename Scalar>
double clustering_cost(const BasicDataset<Scalar>& ds, const BasicClusterState<Scalar>& s) {
  return clustering_cost(ds, s.labels, s.clusters());
}

// Nonnegative count ratio compared exactly by cross-multiplication.
struct CountRatio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator<(const CountRatio& a, const CountRatio& b) { return a.num * b.den < b.num * a.den; }
};

// Smallest within-cluster ratio and the ordered group pair (under, over) that
// attains it; ties go to the lexicographically smallest pair. Pairs whose
// denominator is zero are +inf and never attain the minimum.
struct CriticalPair {
  CountRatio ratio;
  int under = 0;
  int over = 1;
};

template <typename Row>
CriticalPair critical_pair(const Row& row) {
  const auto J = static_cast<int>(row.size());
  if (J < 2) throw DataError("balance needs at least two groups");
  bool any = false;
  for (int j = 0; j < J; ++j) {
    if (row[j] < 0) throw DataError("negative group count");
    any = any || row[j] > 0;
  }
  if (!any) throw DegenerateClusterError("balance of an empty cluster is undefined");
  CriticalPair best;
  bool found = false;
  for (int j = 0; j < J; ++j) {
    for (int jp = 0; jp < J; ++jp) {
      if (j == jp || row[jp] == 0) continue;
      const CountRatio r{static_cast<std::int64_t>(row[j]), static_cast<std::int64_t>(row[jp])};
      if (!found || r < best.ratio) {
        best = {r, j, jp};
        found = true;
      }
    }
  }
  return best;
}

// b_k = min over ordered pairs j != j' of |C_k ∩ V_j| / |C_k ∩ V_j'|; a cluster
// missing any group scores 0.
template <typename Row>
double cluster_balance(const Row& row) {
  return critical_pair(row).ratio.value();
}

inline double cluster_balance(const std::vector<std::int64_t>& row) {
  return cluster_balance(Eigen::Map<const CountVector>(row.data(), static_cast<Eigen::Index>(row.size())));
}

struct OverallBalance {
  double value = 0.0;
  int cluster = 0;  // bottleneck cluster l (lowest index on ties)
  int under = 0;    // j: under-represented group in C_l
  int over = 1;     // j': over-represented group in C_l
  CountRatio ratio;
};

inline OverallBalance overall_balance(const CountMatrix& group_counts) {
  OverallBalance out;
  for (Eigen::Index k = 0; k < group_counts.rows(); ++k) {
    const auto cp = critical_pair(group_counts.row(k));
    if (k == 0 || cp.ratio < out.ratio) {
      out.ratio = cp.ratio;
      out.cluster = static_cast<int>(k);
      out.under = cp.under;
      out.over = cp.over;
    }
  }
  out.value = out.ratio.value();
  return out;
}

template <typename Scalar>
OverallBalance overall_balance(const BasicClusterState<Scalar>& s) {
  return overall_balance(s.group_counts);
}

// f2 computed straight from a labelling.
template <typename Scalar>
double clustering_balance(const BasicDataset<Scalar>& ds, const Labels& labels, int K) {
  CountMatrix g = CountMatrix::Zero(K, static_cast<Eigen::Index>(ds.groups()));
  for (std::size_t p = 0; p < labels.size(); ++p) ++g(labels[p], ds.group_of[p]);
  return overall_balance(g).value;
}

struct Provenance {
  std::uint64_t seed = 0;
  int n_a = 0;
  int n_b = 0;
  int iteration = 0;
};

// One evaluated outcome. Labels are stored one byte per point (K <= 256).
struct ParetoPoint {
  double cost = 0.0;
  double balance = 0.0;
  std::vector<std::uint8_t> labels;
  Provenance provenance;

  Labels unpacked_labels() const { return Labels(labels.begin(), labels.end()); }
};

inline std::vector<std::uint8_t> pack_labels(const Labels& labels) {
  std::vector<std::uint8_t> out(labels.size());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] < 0 || labels[p] > 255) throw ConfigError("packed labels support K <= 256");
    out[p] = static_cast<std::uint8_t>(labels[p]);
  }
  return out;
}

template <typename Scalar>
ParetoPoint evaluate(const BasicDataset<Scalar>& ds, const Labels& labels, int K, const Provenance& prov) {
  return {clustering_cost(ds, labels, K), clustering_balance(ds, labels, K), pack_labels(labels), prov};
}

// q is dominated by p when p has strictly lower cost and strictly higher balance.
inline bool dominates(const ParetoPoint& p, const ParetoPoint& q) {
  return p.cost < q.cost && p.balance > q.balance;
}

}  // namespace fairkm
