#include "outsel/linear_model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace outsel {

IndexSet allIndices(Index n) {
  IndexSet out(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<size_t>(i)] = i;
  return out;
}

IndexSet complementOf(const IndexSet& subset, Index n) {
  IndexSet out;
  size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    if (k < subset.size() && subset[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<long> toOneBased(const IndexSet& indices) {
  std::vector<long> out;
  out.reserve(indices.size());
  for (Index i : indices) out.push_back(static_cast<long>(i) + 1);
  return out;
}

namespace {

bool parseDouble(const std::string& text, double& out) {
  size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  if (b == e) return false;
  const char* first = text.data() + b;
  const char* last = text.data() + e;
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void checkFullRank(const Matrix& X) {
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < X.cols()) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient (numerical rank " << qr.rank() << " < p = " << X.cols()
        << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

Dataset makeDataset(Vector y, Matrix X, std::vector<std::string> columnNames, bool hasIntercept) {
  if (y.size() != X.rows()) throw ValidationError("response length does not match design rows");
  if (X.cols() < 1) throw ValidationError("design needs at least one column");
  if (X.rows() <= X.cols()) {
    throw ValidationError("need n > p (n = " + std::to_string(X.rows()) +
                          ", p = " + std::to_string(X.cols()) + ")");
  }
  if (!y.allFinite() || !X.allFinite()) throw ValidationError("non-finite value in data");
  if (columnNames.empty()) {
    for (Index j = 0; j < X.cols(); ++j) columnNames.push_back("x" + std::to_string(j));
  }
  if (static_cast<Index>(columnNames.size()) != X.cols()) {
    throw ValidationError("column name count does not match design columns");
  }
  checkFullRank(X);
  Dataset d;
  d.y = std::move(y);
  d.X = std::move(X);
  d.columnNames = std::move(columnNames);
  d.hasIntercept = hasIntercept;
  return d;
}

Dataset validateDataset(const Table& raw, const std::string& responseName, bool intercept) {
  if (raw.names.size() != raw.columns.size()) throw ValidationError("table header/column mismatch");
  if (raw.columns.empty()) throw ValidationError("empty table");
  const size_t rows = raw.columns.front().size();
  for (const auto& col : raw.columns) {
    if (col.size() != rows) throw ValidationError("table is not rectangular");
  }
  size_t responseCol = raw.names.size();
  for (size_t c = 0; c < raw.names.size(); ++c) {
    if (raw.names[c] == responseName) responseCol = c;
  }
  if (responseCol == raw.names.size()) {
    throw ValidationError("response column '" + responseName + "' not found");
  }

  const Index n = static_cast<Index>(rows);
  const Index covariates = static_cast<Index>(raw.names.size()) - 1;
  const Index p = covariates + (intercept ? 1 : 0);
  Vector y(n);
  Matrix X(n, p);
  std::vector<std::string> names;
  if (intercept) {
    X.col(0).setOnes();
    names.emplace_back("(Intercept)");
  }
  Index j = intercept ? 1 : 0;
  for (size_t c = 0; c < raw.names.size(); ++c) {
    for (Index i = 0; i < n; ++i) {
      double v = 0.0;
      const auto& cell = raw.columns[c][static_cast<size_t>(i)];
      if (!parseDouble(cell, v)) {
        throw ValidationError("non-numeric cell '" + cell + "' in column '" + raw.names[c] +
                              "', row " + std::to_string(i + 1));
      }
      if (c == responseCol) {
        y(i) = v;
      } else {
        X(i, j) = v;
      }
    }
    if (c != responseCol) {
      names.push_back(raw.names[c]);
      ++j;
    }
  }
  Dataset d = makeDataset(std::move(y), std::move(X), std::move(names), intercept);
  d.responseName = responseName;
  return d;
}

Matrix orthonormalBasis(const Matrix& A, double tolerance) {
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(tolerance);
  if (qr.rank() < A.cols()) {
    throw NumericalError("matrix lost column rank (rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(A.cols()) + ")");
  }
  return qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
}

Vector gatherRows(const Vector& v, const IndexSet& subset) {
  Vector out(static_cast<Index>(subset.size()));
  for (size_t k = 0; k < subset.size(); ++k) out(static_cast<Index>(k)) = v(subset[k]);
  return out;
}

Matrix gatherRows(const Matrix& A, const IndexSet& subset) {
  Matrix out(static_cast<Index>(subset.size()), A.cols());
  for (size_t k = 0; k < subset.size(); ++k) out.row(static_cast<Index>(k)) = A.row(subset[k]);
  return out;
}

Vector scatterRows(const Vector& values, const IndexSet& subset, Index n) {
  Vector out = Vector::Zero(n);
  for (size_t k = 0; k < subset.size(); ++k) out(subset[k]) = values(static_cast<Index>(k));
  return out;
}

Vector OlsFit::pinvRow(Index j, Index n) const {
  return scatterRows(qBasis * pinvFactor.row(j).transpose(), subset, n);
}

Vector OlsFit::pinvCombination(const Vector& x0, Index n) const {
  return scatterRows(qBasis * (pinvFactor.transpose() * x0), subset, n);
}

OlsFit fitOls(const Dataset& data, const IndexSet& subset) {
  const Index p = data.p();
  const Index m = static_cast<Index>(subset.size());
  if (m <= p) {
    throw NumericalError("fit needs more rows than columns (|M| = " + std::to_string(m) +
                         ", p = " + std::to_string(p) + ")");
  }
  const Matrix XM = gatherRows(data.X, subset);
  const Vector yM = gatherRows(data.y, subset);

  Eigen::ColPivHouseholderQR<Matrix> qr(XM);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p) throw NumericalError("design lost column rank after row deletion");

  OlsFit fit;
  fit.subset = subset;
  fit.qBasis = qr.householderQ() * Matrix::Identity(m, p);
  const Matrix R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  fit.pinvFactor = qr.colsPermutation() * Rinv;

  const Vector qty = fit.qBasis.transpose() * yM;
  fit.coefficients = fit.pinvFactor * qty;
  fit.fitted = fit.qBasis * qty;
  fit.residuals = yM - fit.fitted;
  fit.leverage = fit.qBasis.rowwise().squaredNorm();
  fit.rss = fit.residuals.squaredNorm();
  fit.sigmaSq = fit.rss / static_cast<double>(m - p);
  fit.sigmaRefit = std::sqrt(fit.sigmaSq);

  const double tss = (yM.array() - yM.mean()).square().sum();
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 1.0;
  fit.adjustedR2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(m - 1) / static_cast<double>(m - p);
  return fit;
}

OlsFit fitOls(const Dataset& data) { return fitOls(data, allIndices(data.n())); }

}  // namespace outsel
