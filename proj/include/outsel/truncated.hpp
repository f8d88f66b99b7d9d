#pragma once

#include "outsel/interval_set.hpp"

#include <vector>

namespace outsel {

enum class BaseFamily { Normal, ChiSquared, Fisher };

struct IntervalMass {
  double mass;
  double logMass;
};

/// P(N(mean, 1) in [lo, hi]), differencing the tail on the far side of the
/// mean so neither term cancels; logMass stays finite deep in the tails.
IntervalMass gaussianIntervalMassStable(double mean, double lo, double hi);

/// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
double logAddExp(double a, double b);

/// Normal(mean, 1), chi-squared(df) or F(d1, d2) restricted to an IntervalSet.
///
/// Every mass is accumulated in log space, so the distribution stays usable
/// when the total truncated mass is far below the smallest double.
class TruncatedDistribution {
 public:
  static TruncatedDistribution normal(double mean, IntervalSet support);
  static TruncatedDistribution chiSquared(double df, IntervalSet support);
  static TruncatedDistribution fisher(double d1, double d2, IntervalSet support);

  BaseFamily family() const { return family_; }
  const IntervalSet& support() const { return support_; }
  double logMass() const { return logTotal_; }

  double cdf(double x) const;
  /// 1 - cdf(x), computed directly from the upper pieces.
  double sf(double x) const;

  /// log of the base-distribution mass of [lo, hi].
  double logIntervalMass(double lo, double hi) const;

 private:
  TruncatedDistribution(BaseFamily family, double a, double b, IntervalSet support);
  double baseLogCdf(double x) const;
  double baseLogSf(double x) const;
  double logMassBelow(double x) const;
  double logMassAbove(double x) const;

  BaseFamily family_;
  double a_, b_;  ///< mean (normal), df (chi2) or (d1, d2) (F)
  IntervalSet support_;
  std::vector<double> pieceLogMass_;
  double logTotal_ = 0.0;
};

/// The mean mu with F^E_{mu,1}(zObs) = target, by bracket expansion from
/// zObs +/- 10 and bisection. |mu - zObs| is capped at 1e6.
double tnMeanSolve(const IntervalSet& E, double zObs, double target);

}  // namespace outsel
