#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fairkm/dataset.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"

namespace testutil {

using fairkm::Dataset;
using fairkm::Labels;

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& groups) {
  Dataset ds;
  const auto d = rows.empty() ? 0 : rows.front().size();
  ds.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  ds.group_of = groups;
  int J = 0;
  for (int g : groups) J = std::max(J, g + 1);
  for (int j = 0; j < J; ++j) ds.group_names.push_back("g" + std::to_string(j));
  return ds;
}

// Group sizes only; every point sits at the origin.
inline Dataset dataset_with_group_sizes(const std::vector<int>& sizes) {
  Dataset ds;
  int total = 0;
  for (int s : sizes) total += s;
  ds.points = fairkm::RowMatrix<double>::Zero(total, 1);
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    ds.group_names.push_back("g" + std::to_string(j));
    for (int n = 0; n < sizes[j]; ++n) ds.group_of.push_back(static_cast<int>(j));
  }
  return ds;
}

// N points in [-5, 5]^d with uniformly random groups, every group populated.
inline Dataset random_dataset(fairkm::Rng& rng, std::size_t N, std::size_t d, int J) {
  Dataset ds;
  ds.points.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < ds.points.size(); ++i) ds.points.data()[i] = 10.0 * rng.uniform() - 5.0;
  for (std::size_t p = 0; p < N; ++p)
    ds.group_of.push_back(p < static_cast<std::size_t>(J) ? static_cast<int>(p) : static_cast<int>(rng.index(J)));
  for (int j = 0; j < J; ++j) ds.group_names.push_back("g" + std::to_string(j));
  return ds;
}

// Uniform labels with every cluster populated.
inline Labels random_labels(fairkm::Rng& rng, std::size_t N, int K) {
  Labels labels(N);
  for (std::size_t p = 0; p < N; ++p)
    labels[p] = p < static_cast<std::size_t>(K) ? static_cast<int>(p) : static_cast<int>(rng.index(K));
  for (std::size_t p = N; p-- > 1;) std::swap(labels[p], labels[rng.index(p + 1)]);
  return labels;
}

// Direct evaluation: means by summation, then squared distances.
inline double cost_oracle(const Dataset& ds, const Labels& labels, int K) {
  const auto d = ds.dim();
  std::vector<std::vector<double>> sum(K, std::vector<double>(d, 0.0));
  std::vector<int> n(K, 0);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    ++n[labels[p]];
    for (std::size_t k = 0; k < d; ++k) sum[labels[p]][k] += ds.points(p, k);
  }
  double total = 0.0;
  for (std::size_t p = 0; p < labels.size(); ++p)
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = ds.points(p, k) - sum[labels[p]][k] / n[labels[p]];
      total += diff * diff;
    }
  return total / static_cast<double>(labels.size());
}

// Overall balance by enumerating every (cluster, j, j') triple.
inline double balance_oracle(const fairkm::CountMatrix& g) {
  double best = 1e300;
  for (Eigen::Index k = 0; k < g.rows(); ++k)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      for (Eigen::Index jp = 0; jp < g.cols(); ++jp) {
        if (j == jp) continue;
        const double r = g(k, jp) == 0 ? 1e300 : double(g(k, j)) / double(g(k, jp));
        best = std::min(best, r);
      }
  return best;
}

}  // namespace testutil
