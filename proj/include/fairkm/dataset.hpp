#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fairkm/random.hpp"
#include "fairkm/types.hpp"

namespace fairkm {

// N points in R^d, each tagged with exactly one of J demographic groups.
template <typename Scalar>
struct BasicDataset {
  RowMatrix<Scalar> points;              // N x d
  std::vector<int> group_of;             // length N, ids in [0, J)
  std::vector<std::string> group_names;  // length J

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  std::size_t groups() const { return group_names.size(); }

  std::vector<std::int64_t> group_sizes() const {
    std::vector<std::int64_t> sizes(groups(), 0);
    for (int g : group_of) ++sizes[static_cast<std::size_t>(g)];
    return sizes;
  }
};

using Dataset = BasicDataset<double>;

// Throws DataError unless the dataset satisfies its invariants (J >= 2, every
// group populated, one valid id per point).
template <typename Scalar>
void validate(const BasicDataset<Scalar>& ds) {
  if (ds.size() == 0) throw DataError("dataset has no points");
  if (ds.group_of.size() != ds.size())
    throw DataError("group label count " + std::to_string(ds.group_of.size()) + " does not match point count " +
                    std::to_string(ds.size()));
  if (ds.groups() < 2) throw DataError("J must be >= 2: balance is undefined for a single demographic group");
  for (int g : ds.group_of)
    if (g < 0 || static_cast<std::size_t>(g) >= ds.groups()) throw DataError("group id out of range");
  const auto sizes = ds.group_sizes();
  for (std::size_t j = 0; j < sizes.size(); ++j)
    if (sizes[j] == 0) throw DataError("demographic group '" + ds.group_names[j] + "' has no points");
  if (!ds.points.allFinite()) throw DataError("dataset contains non-finite feature values");
}

// Best overall balance any clustering can reach: min_j |V_j| / max_j |V_j|.
template <typename Scalar>
double dataset_balance(const BasicDataset<Scalar>& ds) {
  if (ds.groups() < 2) throw DataError("J must be >= 2");
  const auto sizes = ds.group_sizes();
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  return static_cast<double>(*lo) / static_cast<double>(*hi);
}

// One axis-aligned Gaussian blob and how many points of each group it emits.
template <typename Scalar>
struct GaussianComponent {
  Vector<Scalar> mean;
  Vector<Scalar> variance;            // diagonal covariance, entries > 0
  std::vector<std::int64_t> counts;   // per group
};

template <typename Scalar>
struct BasicSyntheticSpec {
  std::vector<std::string> group_names;
  std::vector<GaussianComponent<Scalar>> components;
  std::uint64_t seed = 0;
};

using SyntheticSpec = BasicSyntheticSpec<double>;

template <typename Scalar>
void validate(const BasicSyntheticSpec<Scalar>& spec) {
  if (spec.components.empty()) throw ConfigError("synthetic spec has no components");
  const auto J = spec.group_names.size();
  const auto d = spec.components.front().mean.size();
  if (d == 0) throw ConfigError("synthetic spec has zero dimension");
  std::int64_t total = 0;
  for (const auto& c : spec.components) {
    if (c.mean.size() != d || c.variance.size() != d) throw ConfigError("component dimension mismatch");
    if (c.counts.size() != J) throw ConfigError("component counts must list one entry per group");
    if (!(c.variance.array() > Scalar(0)).all() || !c.variance.allFinite())
      throw ConfigError("covariance entries must be positive");
    if (!c.mean.allFinite()) throw ConfigError("component mean must be finite");
    for (auto n : c.counts) {
      if (n < 0) throw ConfigError("component counts must be nonnegative");
      total += n;
    }
  }
  if (total == 0) throw ConfigError("synthetic spec produces zero points");
}

// Points are emitted component by component, group by group. Component c draws
// from the stream split_seed(spec.seed, {c}), so adding a component never
// perturbs the others.
template <typename Scalar>
BasicDataset<Scalar> generate_gaussian_mixture(const BasicSyntheticSpec<Scalar>& spec) {
  validate(spec);
  const auto d = spec.components.front().mean.size();
  std::int64_t total = 0;
  for (const auto& c : spec.components)
    for (auto n : c.counts) total += n;

  BasicDataset<Scalar> ds;
  ds.group_names = spec.group_names;
  ds.points.resize(total, d);
  ds.group_of.reserve(static_cast<std::size_t>(total));

  Eigen::Index row = 0;
  for (std::size_t ci = 0; ci < spec.components.size(); ++ci) {
    const auto& comp = spec.components[ci];
    Rng rng(split_seed(spec.seed, {static_cast<std::uint64_t>(ci)}));
    const Vector<Scalar> sd = comp.variance.array().sqrt();
    for (std::size_t j = 0; j < comp.counts.size(); ++j) {
      for (std::int64_t n = 0; n < comp.counts[j]; ++n, ++row) {
        for (Eigen::Index k = 0; k < d; ++k)
          ds.points(row, k) = comp.mean[k] + sd[k] * static_cast<Scalar>(rng.normal());
        ds.group_of.push_back(static_cast<int>(j));
      }
    }
  }
  validate(ds);
  return ds;
}

}  // namespace fairkm
