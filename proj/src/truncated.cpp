#include "outsel/truncated.hpp"

#include "outsel/common.hpp"
#include "outsel/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace outsel {

namespace {

const double kLogHalf = -std::numbers::ln2;

double log1mexp(double logX) {
  if (logX >= 0.0) return -kInf;
  return logX > kLogHalf ? std::log(-std::expm1(logX)) : std::log1p(-std::exp(logX));
}

}  // namespace

double logAddExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

IntervalMass gaussianIntervalMassStable(double mean, double lo, double hi) {
  const auto dist = TruncatedDistribution::normal(mean, IntervalSet::real());
  const double logMass = dist.logIntervalMass(lo, hi);
  return {std::exp(logMass), logMass};
}

TruncatedDistribution::TruncatedDistribution(BaseFamily family, double a, double b,
                                             IntervalSet support)
    : family_(family), a_(a), b_(b), support_(std::move(support)) {
  if (family_ != BaseFamily::Normal) support_ = support_.intersect(IntervalSet::nonNegative());
  logTotal_ = -kInf;
  for (const auto& piece : support_.pieces()) {
    const double lm = logIntervalMass(piece.lo, piece.hi);
    pieceLogMass_.push_back(lm);
    logTotal_ = logAddExp(logTotal_, lm);
  }
  if (logTotal_ == -kInf || std::isnan(logTotal_)) {
    throw NumericalError("truncation set " + support_.toString() + " has zero probability mass");
  }
}

TruncatedDistribution TruncatedDistribution::normal(double mean, IntervalSet support) {
  if (!std::isfinite(mean)) throw ValidationError("truncated normal mean must be finite");
  return {BaseFamily::Normal, mean, 0.0, std::move(support)};
}

TruncatedDistribution TruncatedDistribution::chiSquared(double df, IntervalSet support) {
  if (!(df > 0.0)) throw ValidationError("chi-squared degrees of freedom must be positive");
  return {BaseFamily::ChiSquared, df, 0.0, std::move(support)};
}

TruncatedDistribution TruncatedDistribution::fisher(double d1, double d2, IntervalSet support) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw ValidationError("F degrees of freedom must be positive");
  return {BaseFamily::Fisher, d1, d2, std::move(support)};
}

double TruncatedDistribution::baseLogCdf(double x) const {
  switch (family_) {
    case BaseFamily::Normal:
      return special::normalLogCdf(x - a_);
    case BaseFamily::ChiSquared:
      return special::chiSquaredLogCdf(x, a_);
    case BaseFamily::Fisher:
      return special::fisherLogCdf(x, a_, b_);
  }
  return 0.0;
}

double TruncatedDistribution::baseLogSf(double x) const {
  switch (family_) {
    case BaseFamily::Normal:
      return special::normalLogSf(x - a_);
    case BaseFamily::ChiSquared:
      return special::chiSquaredLogSf(x, a_);
    case BaseFamily::Fisher:
      return special::fisherLogSf(x, a_, b_);
  }
  return 0.0;
}

double TruncatedDistribution::logIntervalMass(double lo, double hi) const {
  if (!(hi > lo)) return -kInf;
  const double sfLo = baseLogSf(lo);
  if (sfLo <= kLogHalf) {
    // Entirely in the upper half: difference of survival functions.
    return sfLo + log1mexp(std::min(0.0, baseLogSf(hi) - sfLo));
  }
  const double cdfHi = baseLogCdf(hi);
  if (cdfHi <= kLogHalf) {
    return cdfHi + log1mexp(std::min(0.0, baseLogCdf(lo) - cdfHi));
  }
  // Straddles the median: both tails are at most one half.
  const double mass = 1.0 - std::exp(baseLogCdf(lo)) - std::exp(baseLogSf(hi));
  return mass > 0.0 ? std::log(mass) : -kInf;
}

double TruncatedDistribution::logMassBelow(double x) const {
  double acc = -kInf;
  const auto& pieces = support_.pieces();
  for (size_t k = 0; k < pieces.size(); ++k) {
    if (x <= pieces[k].lo) break;
    const double lm = x >= pieces[k].hi ? pieceLogMass_[k] : logIntervalMass(pieces[k].lo, x);
    acc = logAddExp(acc, lm);
  }
  return acc;
}

double TruncatedDistribution::logMassAbove(double x) const {
  double acc = -kInf;
  const auto& pieces = support_.pieces();
  for (size_t k = pieces.size(); k-- > 0;) {
    if (x >= pieces[k].hi) break;
    const double lm = x <= pieces[k].lo ? pieceLogMass_[k] : logIntervalMass(x, pieces[k].hi);
    acc = logAddExp(acc, lm);
  }
  return acc;
}

double TruncatedDistribution::cdf(double x) const {
  return std::clamp(std::exp(logMassBelow(x) - logTotal_), 0.0, 1.0);
}

double TruncatedDistribution::sf(double x) const {
  return std::clamp(std::exp(logMassAbove(x) - logTotal_), 0.0, 1.0);
}

double tnMeanSolve(const IntervalSet& E, double zObs, double target) {
  if (!(target > 0.0 && target < 1.0)) throw ValidationError("target probability must lie in (0, 1)");
  if (!E.contains(zObs)) throw ValidationError("observed statistic lies outside the truncation set");

  // Decreasing in mu; the upper tail is used when it is the smaller side.
  const bool useSf = target > 0.5;
  auto residual = [&](double mu) {
    const auto dist = TruncatedDistribution::normal(mu, E);
    return useSf ? (1.0 - target) - dist.sf(zObs) : dist.cdf(zObs) - target;
  };

  constexpr double kMaxOffset = 1e6;
  double offsetLo = 10.0, offsetHi = 10.0;
  double lo = zObs - offsetLo, hi = zObs + offsetHi;
  for (int k = 0; residual(lo) < 0.0; ++k) {
    if (k >= 60 || offsetLo >= kMaxOffset) {
      throw NumericalError("mean solve: no lower bracket within 1e6 of the observed statistic");
    }
    offsetLo = std::min(2.0 * offsetLo, kMaxOffset);
    lo = zObs - offsetLo;
  }
  for (int k = 0; residual(hi) > 0.0; ++k) {
    if (k >= 60 || offsetHi >= kMaxOffset) {
      throw NumericalError("mean solve: no upper bracket within 1e6 of the observed statistic");
    }
    offsetHi = std::min(2.0 * offsetHi, kMaxOffset);
    hi = zObs + offsetHi;
  }

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (r == 0.0) break;
    if (r > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
  }
  mid = 0.5 * (lo + hi);
  const double finalResidual = std::abs(residual(mid));
  if (finalResidual > 1e-8) {
    std::ostringstream msg;
    msg << "mean solve did not converge (CDF residual " << finalResidual << " on "
        << E.toString() << ")";
    throw NumericalError(msg.str());
  }
  return mid;
}

}  // namespace outsel
