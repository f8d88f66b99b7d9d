#pragma once

#include "outsel/common.hpp"

#include <memory>
#include <string>
#include <vector>

namespace outsel {

/// Column-oriented string table as read from a CSV file.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> columns;
};

struct Dataset {
  Vector y;
  Matrix X;
  std::vector<std::string> columnNames;
  std::string responseName;
  bool hasIntercept = false;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

/// Relative singular-value (pivot) tolerance used for every rank decision.
inline constexpr double kRankTolerance = 1e-10;

/// Parses and checks a table. Every non-response column becomes a covariate;
/// an all-ones "(Intercept)" column is prepended when requested.
Dataset validateDataset(const Table& raw, const std::string& responseName, bool intercept);

/// Builds a dataset directly from numeric arrays, with the same checks.
Dataset makeDataset(Vector y, Matrix X, std::vector<std::string> columnNames = {},
                    bool hasIntercept = false);

/// Orthonormal basis U of a column space; residual(y) = (I - U U^T) y.
class ColumnSpaceProjector {
 public:
  explicit ColumnSpaceProjector(Matrix basis) : basis_(std::move(basis)) {}

  const Matrix& basis() const { return basis_; }
  Index dim() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }

  Vector project(const Vector& y) const { return basis_ * (basis_.transpose() * y); }
  Vector residual(const Vector& y) const { return y - project(y); }
  /// (I - P)_{ii}
  double residualDiagonal(Index i) const { return 1.0 - basis_.row(i).squaredNorm(); }
  /// (I - P)_{ij}
  double residualEntry(Index i, Index j) const {
    return (i == j ? 1.0 : 0.0) - basis_.row(i).dot(basis_.row(j));
  }

 private:
  Matrix basis_;
};

/// Orthonormal basis for the column space of a full-column-rank matrix.
/// Throws NumericalError when the numerical rank is below cols().
Matrix orthonormalBasis(const Matrix& A, double tolerance = kRankTolerance);

/// OLS fit on a subset of rows, via column-pivoted Householder QR.
struct OlsFit {
  IndexSet subset;
  Vector coefficients;
  Vector fitted;     ///< on the subset rows, in subset order
  Vector residuals;  ///< on the subset rows, in subset order
  Vector leverage;   ///< hat-matrix diagonal on the subset rows
  double rss = 0.0;
  double sigmaRefit = 0.0;  ///< sqrt(rss / (|M| - p))
  double sigmaSq = 0.0;     ///< rss / (|M| - p)
  double r2 = 0.0;
  double adjustedR2 = 0.0;
  /// Orthonormal basis of col(X_M) (|M| x p).
  Matrix qBasis;
  /// X_M^+ = pinvFactor * qBasis^T, pinvFactor = Pi R^{-1} (p x p).
  Matrix pinvFactor;

  Index m() const { return static_cast<Index>(subset.size()); }
  Index p() const { return coefficients.size(); }
  Index dfResidual() const { return m() - p(); }

  /// Row j of X_M^+, scattered into an n-vector that is zero outside the subset.
  Vector pinvRow(Index j, Index n) const;
  /// (x0^T X_M^+) scattered into an n-vector.
  Vector pinvCombination(const Vector& x0, Index n) const;
  /// Projector onto col(X_M) in subset coordinates.
  ColumnSpaceProjector projector() const { return ColumnSpaceProjector(qBasis); }
};

OlsFit fitOls(const Dataset& data, const IndexSet& subset);
OlsFit fitOls(const Dataset& data);

/// Rows of v indexed by the subset.
Vector gatherRows(const Vector& v, const IndexSet& subset);
Matrix gatherRows(const Matrix& A, const IndexSet& subset);
/// Writes subset-ordered values into an n-vector (zeros elsewhere).
Vector scatterRows(const Vector& values, const IndexSet& subset, Index n);

}  // namespace outsel
