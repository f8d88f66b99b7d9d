#include "outsel/inference.hpp"

#include "outsel/special_functions.hpp"
#include "outsel/truncated.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace outsel {

namespace {

ContrastSpec finishContrast(Vector nu, const Dataset& data, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
  ContrastSpec c;
  c.nuNorm = nu.norm();
  if (!(c.nuNorm > 0.0)) throw ValidationError("contrast vector is zero");
  c.estimate = nu.dot(data.y);
  c.sigma = sigma;
  c.z = c.estimate / (sigma * c.nuNorm);
  c.zResidual = data.y - (c.estimate / (c.nuNorm * c.nuNorm)) * nu;
  c.nu = std::move(nu);
  return c;
}

/// Slices built from floating-point roots can miss the observed value by a
/// rounding error when it sits on a boundary; absorb that, reject anything larger.
IntervalSet ensureContains(IntervalSet set, double x, const char* what) {
  if (set.contains(x)) return set;
  const double tol = 1e-6 * std::max(1.0, std::abs(x));
  for (const auto& piece : set.pieces()) {
    if (x >= piece.lo - tol && x <= piece.hi + tol) return set.unite(IntervalSet({{x, x}}));
  }
  std::ostringstream msg;
  msg << "observed " << what << " " << x << " lies outside its truncation set " << set.toString();
  throw NumericalError(msg.str());
}

/// Residual of v on an orthonormal basis (no-op for an empty basis).
Vector residualOn(const Matrix& basis, const Vector& v) {
  if (basis.cols() == 0) return v;
  return v - basis * (basis.transpose() * v);
}

IndexSet otherColumns(const IndexSet& group, Index p) {
  for (Index j : group) {
    if (j < 0 || j >= p) throw ValidationError("group column index out of range");
  }
  return complementOf(group, p);
}

Matrix selectColumns(const Matrix& A, const IndexSet& cols) {
  Matrix out(A.rows(), static_cast<Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = A.col(cols[k]);
  return out;
}

void checkGroup(IndexSet& group) {
  std::sort(group.begin(), group.end());
  group.erase(std::unique(group.begin(), group.end()), group.end());
  if (group.empty()) throw ValidationError("tested group must be nonempty");
}

}  // namespace

ContrastSpec coefficientContrast(const OlsFit& fit, Index j, const Dataset& data, double sigma) {
  if (j < 0 || j >= fit.p()) throw ValidationError("coefficient index out of range");
  return finishContrast(fit.pinvRow(j, data.n()), data, sigma);
}

ContrastSpec surfaceContrast(const OlsFit& fit, const Vector& x0, const Dataset& data,
                             double sigma) {
  if (x0.size() != fit.p()) throw ValidationError("x0 must have length p");
  return finishContrast(fit.pinvCombination(x0, data.n()), data, sigma);
}

IntervalSet zTruncationSet(const ContrastSpec& contrast, const SelectionEvent& event,
                           Execution exec) {
  const Vector v = contrast.nu / contrast.nuNorm;
  const IntervalSet t = sliceEventOnLine(event, contrast.zResidual, v, exec);
  return ensureContains(t.scaled(1.0 / contrast.sigma), contrast.z, "Z");
}

Interval selectiveInterval(const ContrastSpec& contrast, const IntervalSet& truncation,
                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const double scale = contrast.sigma * contrast.nuNorm;
  const double lo = tnMeanSolve(truncation, contrast.z, 1.0 - alpha / 2);
  const double hi = tnMeanSolve(truncation, contrast.z, alpha / 2);
  return {lo * scale, hi * scale};
}

ZInference selectiveZInference(const ContrastSpec& contrast, const SelectionEvent& event,
                               double alpha, Execution exec) {
  ZInference out;
  out.estimate = contrast.estimate;
  out.z = contrast.z;
  out.truncation = zTruncationSet(contrast, event, exec);
  const auto null = TruncatedDistribution::normal(0.0, out.truncation);
  out.pUpper = null.sf(contrast.z);
  out.pTwoSided = std::min(1.0, 2.0 * std::min(out.pUpper, null.cdf(contrast.z)));
  out.ci = selectiveInterval(contrast, out.truncation, alpha);
  return out;
}

Interval predictionInterval(const ContrastSpec& contrast, const SelectionEvent& event,
                            double alpha, Execution exec) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const IntervalSet truncation = zTruncationSet(contrast, event, exec);
  constexpr int kSplits = 50;
  Interval best{-kInf, kInf};
  for (int k = 1; k <= kSplits; ++k) {
    const double inner = alpha * k / (kSplits + 1);
    const Interval ci = selectiveInterval(contrast, truncation, inner);
    const double q = special::normalQuantile(1.0 - (alpha - inner) / 2) * contrast.sigma;
    const Interval candidate{ci.lo - q, ci.hi + q};
    if (candidate.hi - candidate.lo < best.hi - best.lo) best = candidate;
  }
  return best;
}

GroupChi2Result groupChi2Test(const Dataset& data, const OlsFit& fit, const IndexSet& groupIn,
                              const SelectionEvent& event, double sigma, Execution exec) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  IndexSet group = groupIn;
  checkGroup(group);
  const IndexSet others = otherColumns(group, data.p());
  const Matrix XM = gatherRows(data.X, fit.subset);
  const Matrix otherBasis =
      others.empty() ? Matrix(XM.rows(), 0) : orthonormalBasis(selectColumns(XM, others));
  Matrix tilde = selectColumns(XM, group);
  for (Index k = 0; k < tilde.cols(); ++k) tilde.col(k) = residualOn(otherBasis, tilde.col(k));

  Matrix basisM;
  try {
    basisM = orthonormalBasis(tilde);
  } catch (const NumericalError&) {
    throw NumericalError("tested group is collinear with the remaining columns on M");
  }

  GroupChi2Result out;
  const Index n = data.n();
  out.df = static_cast<double>(group.size());
  out.basis = Matrix::Zero(n, basisM.cols());
  for (size_t k = 0; k < fit.subset.size(); ++k) {
    out.basis.row(fit.subset[k]) = basisM.row(static_cast<Index>(k));
  }
  const Vector proj = out.basis * (out.basis.transpose() * data.y);
  const double len = proj.norm();
  out.statistic = len / sigma;
  out.z = data.y - proj;
  if (!(len > 0.0)) {
    out.pValue = 1.0;
    out.truncation = IntervalSet::nonNegative();
    out.w = Vector::Zero(n);
    return out;
  }
  out.w = proj / len;

  IntervalSet chi = sliceEventOnLine(event, out.z, out.w, exec)
                        .intersect(IntervalSet::nonNegative())
                        .scaled(1.0 / sigma);
  chi = ensureContains(std::move(chi), out.statistic, "chi statistic");
  out.truncation = chi.mapIncreasing([](double x) { return x * x; });
  out.pValue = TruncatedDistribution::chiSquared(out.df, out.truncation)
                   .sf(out.statistic * out.statistic);
  return out;
}

FTestSpec makeFTestSpec(const Dataset& data, const OlsFit& fit, const IndexSet& groupIn) {
  IndexSet group = groupIn;
  checkGroup(group);
  const IndexSet others = otherColumns(group, data.p());
  const Matrix XM = gatherRows(data.X, fit.subset);
  const Vector yM = gatherRows(data.y, fit.subset);
  const Matrix subBasis =
      others.empty() ? Matrix(XM.rows(), 0) : orthonormalBasis(selectColumns(XM, others));

  const Index n = data.n();
  const Vector r1 = scatterRows(residualOn(subBasis, yM), fit.subset, n);
  const Vector r2 = scatterRows(residualOn(fit.qBasis, yM), fit.subset, n);
  const Vector delta = r1 - r2;

  FTestSpec s;
  s.d1 = static_cast<double>(group.size());
  s.d2 = static_cast<double>(fit.dfResidual());
  s.r = r1.norm();
  s.z = data.y - r1;
  const double deltaNorm = delta.norm(), r2Norm = r2.norm();
  if (!(r2Norm > 0.0)) throw NumericalError("residual sum of squares is zero on M");
  s.statistic = (deltaNorm * deltaNorm / s.d1) / (r2Norm * r2Norm / s.d2);
  s.wDelta = deltaNorm > 0.0 ? Vector(delta / deltaNorm) : Vector::Zero(n);
  s.w2 = r2 / r2Norm;
  return s;
}

FTestResult selectiveFTest(const Dataset& data, const OlsFit& fit, const IndexSet& group,
                           const SelectionEvent& event, Execution exec) {
  const FTestSpec s = makeFTestSpec(data, fit, group);
  FTestResult out;
  out.statistic = s.statistic;
  out.d1 = s.d1;
  out.d2 = s.d2;
  out.naivePValue = special::fisherSf(s.statistic, s.d1, s.d2);
  if (!(s.wDelta.squaredNorm() > 0.0)) {
    out.pValue = 1.0;
    out.truncation = IntervalSet::nonNegative();
    return out;
  }
  const CurveSliceResult slice =
      sliceEventOnFCurve(event, s.z, s.wDelta, s.w2, s.r, s.d1, s.d2, {}, exec);
  out.nearTangencies = slice.nearTangencies;
  out.refinements = slice.refinements;
  out.truncation = ensureContains(slice.set, s.statistic, "F statistic");
  out.pValue = TruncatedDistribution::fisher(s.d1, s.d2, out.truncation).sf(s.statistic);
  return out;
}

NaiveResult naiveCoefficient(const OlsFit& fit, Index j, double alpha) {
  if (j < 0 || j >= fit.p()) throw ValidationError("coefficient index out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const double df = static_cast<double>(fit.dfResidual());
  if (!(df > 0.0)) throw NumericalError("no residual degrees of freedom");
  // |nu|^2 = row j of X_M^+ squared = row j of pinvFactor squared (orthonormal Q).
  const double se = fit.sigmaRefit * fit.pinvFactor.row(j).norm();
  NaiveResult out;
  const double est = fit.coefficients(j);
  out.statistic = est / se;
  out.pValue = special::studentTwoSided(out.statistic, df);
  const double q = special::studentQuantile(1.0 - alpha / 2, df);
  out.ci = {est - q * se, est + q * se};
  return out;
}

NaiveResult naiveGroupF(const Dataset& data, const OlsFit& fit, const IndexSet& group) {
  const FTestSpec s = makeFTestSpec(data, fit, group);
  NaiveResult out;
  out.statistic = s.statistic;
  out.pValue = special::fisherSf(s.statistic, s.d1, s.d2);
  out.ci = {0.0, 0.0};
  return out;
}

std::string methodTag(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::Known:
      return "SELECT-KNOWN";
    case SigmaMode::Estimated:
      return "SELECT-EST";
    case SigmaMode::Exact:
      return "SELECT-EXACT";
  }
  return "NAIVE";
}

InferenceReport buildReport(const Dataset& data, const DetectionResult& detection,
                            const InferenceOptions& options, Execution exec) {
  requireEnoughInliers(detection, data.p());
  if (options.sigmaMode != SigmaMode::Exact && !(options.sigma > 0.0)) {
    throw ValidationError("sigma must be positive");
  }
  const OlsFit fit = fitOls(data, detection.inliers);

  InferenceReport rep;
  rep.method = methodTag(options.sigmaMode);
  rep.sigmaMode = options.sigmaMode;
  rep.sigma = options.sigmaMode == SigmaMode::Exact ? 0.0 : options.sigma;
  rep.alpha = options.alpha;
  rep.detectionMethod = detection.method;
  rep.cutoff = detection.cutoff;
  rep.outliers = detection.outliers;
  rep.n = data.n();
  rep.m = fit.m();
  rep.p = data.p();
  rep.adjustedR2 = fit.adjustedR2;

  for (Index j = 0; j < data.p(); ++j) {
    CoefficientReport c;
    c.name = j < static_cast<Index>(data.columnNames.size()) ? data.columnNames[static_cast<size_t>(j)]
                                                             : "x" + std::to_string(j);
    c.estimate = fit.coefficients(j);
    const NaiveResult naive = naiveCoefficient(fit, j, options.alpha);
    c.naiveP = naive.pValue;
    c.naiveCi = naive.ci;
    if (options.sigmaMode == SigmaMode::Exact) {
      const FTestResult f = selectiveFTest(data, fit, {j}, detection.event, exec);
      c.truncation = f.truncation;
      // Untruncated F(1, m-p) is the square of the t statistic.
      c.selectiveP = f.truncation == IntervalSet::nonNegative() ? naive.pValue : f.pValue;
      c.statistic = "F";
    } else {
      const ContrastSpec contrast = coefficientContrast(fit, j, data, options.sigma);
      c.truncation = zTruncationSet(contrast, detection.event, exec);
      const auto null = TruncatedDistribution::normal(0.0, c.truncation);
      c.selectiveP = std::min(1.0, 2.0 * std::min(null.sf(contrast.z), null.cdf(contrast.z)));
      if (options.intervals) c.selectiveCi = selectiveInterval(contrast, c.truncation, options.alpha);
      c.statistic = "Z";
    }
    rep.coefficients.push_back(std::move(c));
  }
  return rep;
}

}  // namespace outsel
