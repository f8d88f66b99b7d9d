#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace outsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free, 0-based observation indices.
using IndexSet = std::vector<Index>;

/// Bad input: malformed tables, inconsistent flags, invalid parameters.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that cannot produce a trustworthy answer (zero-mass
/// truncation sets, failed brackets, rank loss after row deletion).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Selects between the serial reference kernels and their OpenMP twins.
enum class Execution { Serial, Parallel };

/// {0, 1, ..., n-1}
IndexSet allIndices(Index n);

/// [n] \ subset, for a sorted subset.
IndexSet complementOf(const IndexSet& subset, Index n);

/// Converts 0-based indices to the 1-based labels used in user-facing output.
std::vector<long> toOneBased(const IndexSet& indices);

}  // namespace outsel
