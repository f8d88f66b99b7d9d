#pragma once

#include "outsel/common.hpp"
#include "outsel/linear_model.hpp"
#include "outsel/selection_event.hpp"

#include <optional>
#include <string>
#include <vector>

namespace outsel {

enum class DetectionMethod { Cooks, Dffits, SoftIpod };

std::string toString(DetectionMethod m);
DetectionMethod parseDetectionMethod(const std::string& name);

struct DetectionConfig {
  DetectionMethod method = DetectionMethod::Cooks;
  /// Cook's: observations with D_i >= cutoff / n are outliers.
  /// DFFITS: |DFFITS_i| >= cutoff marks an outlier.
  /// soft-IPOD: lasso penalty level.
  double cutoff = 4.0;
};

/// Conventional DFFITS threshold 2 sqrt(p / n).
double defaultDffitsThreshold(Index n, Index p);

struct DetectionResult {
  DetectionMethod method;
  double cutoff = 0.0;
  IndexSet inliers;   ///< detected non-outliers M-hat
  IndexSet outliers;  ///< [n] \ M-hat
  SelectionEvent event;
  /// D_i, |DFFITS_i| or |u_i|.
  Vector scores;
  /// soft-IPOD only: sign of u_i (0 off the support).
  std::optional<std::vector<int>> signs;
};

/// Cook's distances D_i = e_i^2 h_ii / (p sigma^2 (1 - h_ii)^2) from the full fit.
Vector cooksDistances(const Dataset& data, Execution exec = Execution::Parallel);

/// DFFITS_i = e_i sqrt(h_ii) / (s_(i) (1 - h_ii)), s_(i) the leave-one-out scale.
Vector dffits(const Dataset& data);

/// M-hat = { i : D_i < lambda / n } and its event: one intersection of n
/// homogeneous quadratic constraints.
DetectionResult detectCooks(const Dataset& data, double lambda, Execution exec = Execution::Parallel);

/// M-hat = { i : DFFITS_i^2 < threshold^2 } with denominators cleared so each
/// constraint is quadratic in y.
DetectionResult detectDffits(const Dataset& data, double threshold);

struct SoftIpodSolution {
  Vector beta;
  Vector u;
  int iterations = 0;
  double kktResidual = 0.0;
  double objective = 0.0;
};

struct SoftIpodOptions {
  double tolerance = 1e-10;
  int maxIterations = 100000;
};

/// argmin (1/2n)|y - X beta - u|^2 + lambda |u|_1 by alternating an OLS
/// beta-step with elementwise soft-thresholding of residuals at n * lambda.
SoftIpodSolution solveSoftIpod(const Dataset& data, double lambda, const SoftIpodOptions& opt = {});

/// Objective value of the soft-IPOD program at (beta, u).
double softIpodObjective(const Dataset& data, double lambda, const Vector& beta, const Vector& u);

/// Affine event fixing the (support, signs) of u-hat: the lasso KKT
/// conditions for min_u (1/2n)|P_X^perp (y - u)|^2 + lambda |u|_1.
DetectionResult softIpodEvent(const Dataset& data, double lambda, const Vector& u);

/// Dispatches on config.method and enforces |M-hat| > p.
DetectionResult detect(const Dataset& data, const DetectionConfig& config,
                       Execution exec = Execution::Parallel);

/// Throws NumericalError when fewer than p + 1 rows remain.
void requireEnoughInliers(const DetectionResult& result, Index p);

}  // namespace outsel
