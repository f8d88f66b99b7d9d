#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the library routine it checks.

#include "outsel/detection.hpp"
#include "outsel/interval_set.hpp"
#include "outsel/linear_model.hpp"
#include "outsel/truncated.hpp"

#include <functional>
#include <random>

namespace oracle {

using outsel::Dataset;
using outsel::IndexSet;
using outsel::IntervalSet;
using outsel::Matrix;
using outsel::Vector;

/// Intercept plus N(0,1) covariates, a handful of shifted rows. n in [15, 40], p in [2, 4].
Dataset randomCooksInstance(std::mt19937_64& rng);

/// Membership by dense grid on [lo, hi] with every sign change refined by
/// bisection to `tol`. Pieces touching the window edges are clipped there.
IntervalSet gridSet(const std::function<bool(double)>& member, double lo, double hi, int nodes,
                    double tol = 1e-11);

/// Largest endpoint gap between two sets clipped to [lo, hi]; +inf when the
/// piece counts differ.
double endpointDiscrepancy(const IntervalSet& a, const IntervalSet& b, double lo, double hi);

struct SliceCheck {
  double discrepancy = 0.0;
  size_t pieces = 0;
};

/// Line slice along a coefficient contrast versus re-running Cook's detection
/// at every grid point.
SliceCheck checkLineSlice(const Dataset& data, double lambda, outsel::Index j);

/// F-curve slice for H0: beta_j = 0 versus re-detection along the curve, in
/// the angle coordinate theta = atan(sqrt(d1 F / d2)).
SliceCheck checkCurveSlice(const Dataset& data, double lambda, outsel::Index j);

/// log density of the untruncated base law.
double logDensity(outsel::BaseFamily family, double a, double b, double x);

/// P(X <= x | X in support) by adaptive quadrature of the density, rescaled
/// by its value at the most likely support point so tail sets do not underflow.
double quadratureCdf(outsel::BaseFamily family, double a, double b, const IntervalSet& support,
                     double x);
double quadratureSf(outsel::BaseFamily family, double a, double b, const IntervalSet& support,
                    double x);

struct MembershipCheck {
  int checked = 0;
  int mismatches = 0;
  int ambiguous = 0;  ///< re-solve landed within tolerance of a support boundary
};

/// Perturbs y and compares the soft-IPOD event's membership with the
/// (support, signs) of a fresh solve.
MembershipCheck softIpodMembership(const Dataset& data, double lambda, int perturbations,
                                   std::uint64_t seed);

/// Same for Cook's: event membership against full re-detection.
MembershipCheck cooksMembership(const Dataset& data, double lambda, int perturbations,
                                std::uint64_t seed);

/// Normal-equation OLS: (X^T X)^{-1} X^T y by LDLT.
Vector normalEquations(const Matrix& X, const Vector& y);

/// Cook's distances from n explicit leave-one-out refits.
Vector cooksByDeletion(const Dataset& data);

/// DFFITS from n explicit leave-one-out refits.
Vector dffitsByDeletion(const Dataset& data);

}  // namespace oracle
