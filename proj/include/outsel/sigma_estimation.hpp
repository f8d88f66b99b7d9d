#pragma once

#include "outsel/common.hpp"
#include "outsel/linear_model.hpp"

#include <cstdint>
#include <vector>

namespace outsel {

/// How the penalty for sigma-hat_EST is chosen.
///   CvMin / CvOneSe: K-fold CV (held-out rows get gamma = 0), minimum error
///     or the largest lambda within one SE of it.
///   HuberFixedPoint: n * lambda = huberConstant * sigma-hat(lambda), solved
///     by bisection on n * lambda; the result is divided by the Gaussian
///     consistency factor of the clipped residuals.
enum class SigmaRule { CvMin, CvOneSe, HuberFixedPoint };

struct AugmentedLassoOptions {
  int folds = 10;
  int gridSize = 100;
  double decades = 4.0;       ///< grid runs from lambda_max down to lambda_max * 10^-decades
  double tolerance = 1e-9;    ///< coordinate-descent stopping rule, relative to |y|
  int maxSweeps = 100000;
  std::uint64_t foldSeed = 1; ///< seeds the fold permutation
  SigmaRule rule = SigmaRule::HuberFixedPoint;
  double huberConstant = 1.345;
  int maxFixedPointSteps = 200;
  double fixedPointTolerance = 1e-6;  ///< relative bracket width on n * lambda
};

/// Lasso of y on (X : I_n):
///   (1/2n) |y - X beta - gamma|^2 + lambda (|beta_pen|_1 + |gamma|_1),
/// with the intercept column (when flagged) unpenalized.
struct AugmentedLassoFit {
  Vector beta;
  Vector gamma;
  double lambda = 0.0;
  int sweeps = 0;

  Index supportSize(double zeroTol = 0.0) const;
};

/// Smallest lambda with every penalized coefficient at zero.
double augmentedLambdaMax(const Dataset& data);

/// Geometric grid from lambda_max down by options.decades, gridSize points.
std::vector<double> augmentedLambdaGrid(const Dataset& data, const AugmentedLassoOptions& options);

/// Coordinate descent on the rows in `rows` (all rows when empty), warm
/// started from `start` when given.
AugmentedLassoFit solveAugmentedLasso(const Dataset& data, double lambda,
                                      const AugmentedLassoOptions& options = {},
                                      const AugmentedLassoFit* start = nullptr,
                                      const IndexSet& rows = {});

struct SigmaEstimate {
  double sigma = 0.0;
  double lambda = 0.0;
  Index supportSize = 0;
  std::vector<double> lambdas;
  std::vector<double> cvError;
  std::vector<double> cvStandardError;  ///< across folds
};

/// sigma-hat^2 = |y - X beta - gamma|^2 / (n - |support|) at a given fit.
double sigmaFromAugmentedFit(const Dataset& data, const AugmentedLassoFit& fit);

/// sigma-hat_EST with the penalty chosen by options.rule. CV fields of the
/// result are empty under HuberFixedPoint.
SigmaEstimate estimateSigmaAugLasso(const Dataset& data, const AugmentedLassoOptions& options = {});

}  // namespace outsel
