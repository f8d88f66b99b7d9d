#include "outsel/sigma_estimation.hpp"

#include "outsel/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace outsel {

namespace {

double softThreshold(double x, double level) {
  if (x > level) return x - level;
  if (x < -level) return x + level;
  return 0.0;
}

bool interceptFree(const Dataset& data) { return data.hasIntercept; }

/// Residual after fitting only the unpenalized intercept.
Vector interceptResidual(const Dataset& data) {
  if (!interceptFree(data)) return data.y;
  return (data.y.array() - data.y.mean()).matrix();
}

}  // namespace

Index AugmentedLassoFit::supportSize(double zeroTol) const {
  Index s = 0;
  for (Index j = 0; j < beta.size(); ++j) s += std::abs(beta(j)) > zeroTol;
  for (Index i = 0; i < gamma.size(); ++i) s += std::abs(gamma(i)) > zeroTol;
  return s;
}

double augmentedLambdaMax(const Dataset& data) {
  const Vector r = interceptResidual(data);
  const double n = static_cast<double>(data.n());
  double top = r.cwiseAbs().maxCoeff();
  for (Index j = interceptFree(data) ? 1 : 0; j < data.p(); ++j) {
    top = std::max(top, std::abs(data.X.col(j).dot(r)));
  }
  return top / n;
}

std::vector<double> augmentedLambdaGrid(const Dataset& data, const AugmentedLassoOptions& options) {
  if (options.gridSize < 2) throw ValidationError("lambda grid needs at least two points");
  const double top = augmentedLambdaMax(data);
  if (!(top > 0.0)) throw NumericalError("response is constant; lasso path is degenerate");
  std::vector<double> grid(static_cast<size_t>(options.gridSize));
  for (int k = 0; k < options.gridSize; ++k) {
    grid[static_cast<size_t>(k)] =
        top * std::pow(10.0, -options.decades * k / (options.gridSize - 1));
  }
  return grid;
}

AugmentedLassoFit solveAugmentedLasso(const Dataset& data, double lambda,
                                      const AugmentedLassoOptions& options,
                                      const AugmentedLassoFit* start, const IndexSet& rows) {
  if (!(lambda > 0.0)) throw ValidationError("lasso penalty must be positive");
  const IndexSet used = rows.empty() ? allIndices(data.n()) : rows;
  const Matrix X = gatherRows(data.X, used);
  const Vector y = gatherRows(data.y, used);
  const Index m = X.rows(), p = X.cols();
  const double level = static_cast<double>(m) * lambda;
  const Index firstPenalized = interceptFree(data) ? 1 : 0;

  AugmentedLassoFit fit;
  fit.lambda = lambda;
  fit.beta = Vector::Zero(p);
  fit.gamma = Vector::Zero(data.n());
  if (start) {
    fit.beta = start->beta;
    fit.gamma = start->gamma;
  }
  Vector gamma = gatherRows(fit.gamma, used);
  Vector r = y - X * fit.beta - gamma;
  const Vector colSq = X.colwise().squaredNorm().transpose();
  const double stop = options.tolerance * std::max(1.0, y.norm());

  for (fit.sweeps = 0; fit.sweeps < options.maxSweeps;) {
    ++fit.sweeps;
    double maxMove = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double rho = X.col(j).dot(r) + colSq(j) * fit.beta(j);
      const double next = j < firstPenalized ? rho / colSq(j) : softThreshold(rho, level) / colSq(j);
      const double delta = next - fit.beta(j);
      if (delta != 0.0) {
        r.noalias() -= delta * X.col(j);
        fit.beta(j) = next;
        maxMove = std::max(maxMove, std::abs(delta) * std::sqrt(colSq(j)));
      }
    }
    for (Index i = 0; i < m; ++i) {
      const double next = softThreshold(r(i) + gamma(i), level);
      const double delta = next - gamma(i);
      if (delta != 0.0) {
        r(i) -= delta;
        gamma(i) = next;
        maxMove = std::max(maxMove, std::abs(delta));
      }
    }
    if (maxMove <= stop) break;
  }
  if (fit.sweeps >= options.maxSweeps) {
    throw NumericalError("augmented lasso did not converge within the sweep limit");
  }
  fit.gamma = scatterRows(gamma, used, data.n());
  return fit;
}

double sigmaFromAugmentedFit(const Dataset& data, const AugmentedLassoFit& fit) {
  const Index df = data.n() - fit.supportSize();
  if (df < 1) throw NumericalError("augmented lasso support is saturated (n - |S| < 1)");
  const double rss = (data.y - data.X * fit.beta - fit.gamma).squaredNorm();
  return std::sqrt(rss / static_cast<double>(df));
}

namespace {

/// E[sigma-hat^2] / sigma^2 for Gaussian errors when every residual beyond
/// kappa * sigma is clipped to the threshold and dropped from the df:
///   E[min(Z^2, kappa^2)] / P(|Z| < kappa).
double huberConsistency(double kappa) {
  const double inside = 2.0 * special::normalCdf(kappa) - 1.0;
  const double tail = 2.0 * special::normalSf(kappa);
  const double clipped = inside - 2.0 * kappa * special::normalPdf(kappa) + tail * kappa * kappa;
  return clipped / inside;
}

SigmaEstimate huberFixedPoint(const Dataset& data, const AugmentedLassoOptions& options) {
  const double n = static_cast<double>(data.n());
  const double kappa = options.huberConstant;
  if (!(kappa > 0.0)) throw ValidationError("Huber constant must be positive");
  const OlsFit ols = fitOls(data);
  if (ols.dfResidual() < 1) throw NumericalError("no residual degrees of freedom for the starting scale");
  if (!(ols.sigmaRefit > 0.0)) throw NumericalError("response is fitted exactly; sigma-hat is zero");

  // Root of g(c) = c - kappa * sigma-hat(c / n) by bisection; sigma-hat jumps
  // where the support changes, so plain iteration can cycle.
  struct Point {
    double c, sigma;
    AugmentedLassoFit fit;
  };
  auto evaluate = [&](double c, const AugmentedLassoFit* start) {
    Point pt{c, 0.0, solveAugmentedLasso(data, c / n, options, start)};
    pt.sigma = sigmaFromAugmentedFit(data, pt.fit);
    return pt;
  };
  Point hi = evaluate(kappa * ols.sigmaRefit, nullptr);
  int steps = 0;
  while (hi.c < kappa * hi.sigma) {
    if (++steps > options.maxFixedPointSteps) throw NumericalError("sigma-hat fixed point not bracketed");
    hi = evaluate(2.0 * hi.c, &hi.fit);
  }
  Point lo = hi;
  do {
    if (++steps > options.maxFixedPointSteps) throw NumericalError("sigma-hat fixed point not bracketed");
    lo = evaluate(0.5 * lo.c, &lo.fit);
  } while (lo.c >= kappa * lo.sigma);

  while (hi.c - lo.c > options.fixedPointTolerance * hi.c) {
    if (++steps > options.maxFixedPointSteps) throw NumericalError("sigma-hat fixed point did not converge");
    Point mid = evaluate(0.5 * (lo.c + hi.c), &hi.fit);
    (mid.c < kappa * mid.sigma ? lo : hi) = std::move(mid);
  }
  SigmaEstimate est;
  est.sigma = hi.sigma / std::sqrt(huberConsistency(kappa));
  est.lambda = hi.c / n;
  est.supportSize = hi.fit.supportSize();
  return est;
}

}  // namespace

SigmaEstimate estimateSigmaAugLasso(const Dataset& data, const AugmentedLassoOptions& options) {
  if (options.rule == SigmaRule::HuberFixedPoint) return huberFixedPoint(data, options);
  const Index n = data.n();
  if (options.folds < 2 || options.folds > n) throw ValidationError("fold count must lie in [2, n]");
  SigmaEstimate est;
  est.lambdas = augmentedLambdaGrid(data, options);
  const size_t L = est.lambdas.size();
  est.cvError.assign(L, 0.0);
  std::vector<std::vector<double>> foldError(static_cast<size_t>(options.folds),
                                             std::vector<double>(L, 0.0));

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(options.foldSeed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> foldOf(static_cast<size_t>(n));
  for (size_t k = 0; k < order.size(); ++k) {
    foldOf[static_cast<size_t>(order[k])] = static_cast<int>(k % static_cast<size_t>(options.folds));
  }

  for (int f = 0; f < options.folds; ++f) {
    IndexSet train, test;
    for (Index i = 0; i < n; ++i) (foldOf[static_cast<size_t>(i)] == f ? test : train).push_back(i);
    AugmentedLassoFit prev;
    auto& errs = foldError[static_cast<size_t>(f)];
    for (size_t k = 0; k < L; ++k) {
      prev = solveAugmentedLasso(data, est.lambdas[k], options, k ? &prev : nullptr, train);
      for (Index i : test) {
        const double e = data.y(i) - data.X.row(i).dot(prev.beta);
        errs[k] += e * e;
        est.cvError[k] += e * e;
      }
      errs[k] /= static_cast<double>(test.size());
    }
  }
  for (double& e : est.cvError) e /= static_cast<double>(n);
  est.cvStandardError.assign(L, 0.0);
  const double K = static_cast<double>(options.folds);
  for (size_t k = 0; k < L; ++k) {
    double mean = 0.0, sq = 0.0;
    for (const auto& errs : foldError) mean += errs[k] / K;
    for (const auto& errs : foldError) sq += (errs[k] - mean) * (errs[k] - mean);
    est.cvStandardError[k] = std::sqrt(sq / (K - 1) / K);
  }

  size_t best = static_cast<size_t>(
      std::min_element(est.cvError.begin(), est.cvError.end()) - est.cvError.begin());
  if (options.rule == SigmaRule::CvOneSe) {
    // Largest lambda (earliest on the path) within one SE of the minimum.
    const double bound = est.cvError[best] + est.cvStandardError[best];
    for (size_t k = 0; k < best; ++k) {
      if (est.cvError[k] <= bound) {
        best = k;
        break;
      }
    }
  }
  AugmentedLassoFit fit;
  for (size_t k = 0; k <= best; ++k) {
    fit = solveAugmentedLasso(data, est.lambdas[k], options, k ? &fit : nullptr);
  }
  est.lambda = est.lambdas[best];
  est.supportSize = fit.supportSize();
  est.sigma = sigmaFromAugmentedFit(data, fit);
  return est;
}

}  // namespace outsel
