#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fairkm {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

using Labels = std::vector<int>;

// Bad user input: unknown column, unknown preset, invalid option value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be used: unparseable cell, single group, empty file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A clustering with an empty cluster where every cluster must be populated.
class DegenerateClusterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An optimizer iterate left the finite range.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fairkm
