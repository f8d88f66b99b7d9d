#pragma once

#include "outsel/common.hpp"
#include "outsel/detection.hpp"
#include "outsel/interval_set.hpp"
#include "outsel/linear_model.hpp"
#include "outsel/selection_event.hpp"

#include <optional>
#include <string>
#include <vector>

namespace outsel {

/// Linear functional nu^T y of the response with nu supported on M.
struct ContrastSpec {
  Vector nu;
  double nuNorm = 0.0;
  double estimate = 0.0;  ///< nu^T y
  double sigma = 0.0;
  double z = 0.0;         ///< nu^T y / (sigma |nu|)
  Vector zResidual;       ///< (I - nu nu^T / |nu|^2) y
};

/// nu with nu^T y = beta-hat^M_j.
ContrastSpec coefficientContrast(const OlsFit& fit, Index j, const Dataset& data, double sigma);
/// nu with nu^T y = x0^T beta-hat^M.
ContrastSpec surfaceContrast(const OlsFit& fit, const Vector& x0, const Dataset& data,
                             double sigma);

struct ZInference {
  double estimate = 0.0;
  double z = 0.0;
  /// 1 - F^E_{0,1}(Z): small when the estimate is large and positive.
  double pUpper = 0.0;
  /// 2 min(pUpper, 1 - pUpper)
  double pTwoSided = 0.0;
  Interval ci{0.0, 0.0};  ///< on the scale of nu^T y
  IntervalSet truncation;  ///< on the Z axis
};

/// Selective z-test and confidence interval for nu^T mu with sigma known.
ZInference selectiveZInference(const ContrastSpec& contrast, const SelectionEvent& event,
                               double alpha, Execution exec = Execution::Parallel);

/// Truncation set of Z only (used by callers that need several levels).
IntervalSet zTruncationSet(const ContrastSpec& contrast, const SelectionEvent& event,
                           Execution exec = Execution::Parallel);

/// Selective CI at level 1 - alpha on the nu^T y scale for a given truncation set.
Interval selectiveInterval(const ContrastSpec& contrast, const IntervalSet& truncation,
                           double alpha);

/// Conservative selective prediction interval for x0^T beta^M + eps_0:
/// the shortest of [L - q sigma, U + q sigma] over 50 splits of alpha.
Interval predictionInterval(const ContrastSpec& contrast, const SelectionEvent& event,
                            double alpha, Execution exec = Execution::Parallel);

struct GroupChi2Result {
  double statistic = 0.0;  ///< chi = |P-check y| / sigma
  double df = 0.0;
  double pValue = 0.0;
  IntervalSet truncation;  ///< on the chi^2 axis
  Vector w;                ///< unit direction of P-check y
  Vector z;                ///< y - P-check y
  Matrix basis;            ///< orthonormal basis of col(P-check), n x df
};

/// Selective chi^2 test of beta^M_g = 0 with sigma known.
GroupChi2Result groupChi2Test(const Dataset& data, const OlsFit& fit, const IndexSet& group,
                              const SelectionEvent& event, double sigma,
                              Execution exec = Execution::Parallel);

struct FTestResult {
  double statistic = 0.0;
  double d1 = 0.0, d2 = 0.0;
  double pValue = 0.0;      ///< 1 - F^E(F)
  double naivePValue = 0.0; ///< 1 - F(F) without truncation
  IntervalSet truncation;   ///< on the F axis
  int nearTangencies = 0;
  int refinements = 0;
};

/// Pieces of the F-test decomposition y = z + r g1 w_delta + r g2 w_2.
struct FTestSpec {
  Vector z, wDelta, w2;
  double r = 0.0;
  double statistic = 0.0;
  double d1 = 0.0, d2 = 0.0;
};

FTestSpec makeFTestSpec(const Dataset& data, const OlsFit& fit, const IndexSet& group);

/// Selective F test of beta^M_g = 0 with sigma unknown.
FTestResult selectiveFTest(const Dataset& data, const OlsFit& fit, const IndexSet& group,
                           const SelectionEvent& event, Execution exec = Execution::Parallel);

struct NaiveResult {
  double statistic = 0.0;
  double pValue = 0.0;
  Interval ci{0.0, 0.0};
};

/// Classical t inference on the retained rows with sigma-hat_REFIT.
NaiveResult naiveCoefficient(const OlsFit& fit, Index j, double alpha);
/// Classical F test of beta^M_g = 0 on the retained rows.
NaiveResult naiveGroupF(const Dataset& data, const OlsFit& fit, const IndexSet& group);

enum class SigmaMode { Known, Estimated, Exact };

std::string methodTag(SigmaMode mode);

struct InferenceOptions {
  SigmaMode sigmaMode = SigmaMode::Exact;
  double sigma = 0.0;  ///< used for Known and Estimated
  double alpha = 0.05;
  bool intervals = true;  ///< ignored when sigmaMode is Exact
};

struct CoefficientReport {
  std::string name;
  double estimate = 0.0;
  double naiveP = 0.0;
  Interval naiveCi{0.0, 0.0};
  double selectiveP = 0.0;
  std::optional<Interval> selectiveCi;
  IntervalSet truncation;
  std::string statistic;  ///< "Z" or "F"
};

struct InferenceReport {
  std::string method;  ///< SELECT-KNOWN | SELECT-EST | SELECT-EXACT
  SigmaMode sigmaMode = SigmaMode::Exact;
  double sigma = 0.0;
  double alpha = 0.05;
  DetectionMethod detectionMethod = DetectionMethod::Cooks;
  double cutoff = 0.0;
  IndexSet outliers;
  Index n = 0, m = 0, p = 0;
  double adjustedR2 = 0.0;
  std::vector<CoefficientReport> coefficients;
};

/// Per-coefficient naive and selective inference after detection.
///
/// Exact mode reports the raw truncated-F survival 1 - F^E(F) per
/// coefficient; the z modes report 2 min(p, 1 - p).
InferenceReport buildReport(const Dataset& data, const DetectionResult& detection,
                            const InferenceOptions& options, Execution exec = Execution::Parallel);

}  // namespace outsel
