#include "outsel/special_functions.hpp"

#include "outsel/common.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace outsel::special {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kInfinity = std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

double normalPdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normalCdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normalSf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normalLogSf(double x) {
  if (x == -kInfinity) return 0.0;
  if (x == kInfinity) return -kInfinity;
  if (x < 0.0) return std::log1p(-normalCdf(x));
  if (x < 37.0) return std::log(normalSf(x));
  // Mills ratio: 1 - Phi(x) ~ phi(x)/x * sum_k (-1)^k (2k-1)!! / x^{2k}; the
  // k = 7 term is below 1e-17 for x >= 37.
  const double inv2 = 1.0 / (x * x);
  double term = 1.0, series = 0.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    series += term;
  }
  return -0.5 * x * x - kLogSqrt2Pi - std::log(x) + std::log1p(series);
}

double normalLogCdf(double x) { return normalLogSf(-x); }

double normalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInfinity;
    if (p == 1.0) return kInfinity;
    throw ValidationError("normal quantile needs p in [0, 1]");
  }
  // Acklam's rational approximation, then one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Refine against whichever tail is small to keep relative accuracy.
  for (int it = 0; it < 2; ++it) {
    const double e = p < 0.5 ? normalCdf(x) - p : (1.0 - p) - normalSf(x);
    const double u = e / normalPdf(x);
    x = x - u / (1 + x * u / 2);
  }
  return x;
}

// --- incomplete gamma --------------------------------------------------------

namespace {

double logGammaFront(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

/// log P(a, x) by the power series.
double logGammaSeries(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return std::log(sum) + logGammaFront(a, x);
}

/// log Q(a, x) by the Lentz continued fraction.
double logGammaContinuedFraction(double a, double x) {
  double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::log(h) + logGammaFront(a, x);
}

double log1mexp(double logX) {
  // log(1 - e^logX) for logX <= 0, accurate at both ends.
  return logX > -std::numbers::ln2 ? std::log(-std::expm1(logX)) : std::log1p(-std::exp(logX));
}

void checkShape(double a) {
  if (!(a > 0.0)) throw ValidationError("incomplete gamma needs a > 0");
}

}  // namespace

double logGammaP(double a, double x) {
  checkShape(a);
  if (x <= 0.0) return -kInfinity;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? logGammaSeries(a, x) : log1mexp(logGammaContinuedFraction(a, x));
}

double logGammaQ(double a, double x) {
  checkShape(a);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return -kInfinity;
  return x < a + 1.0 ? log1mexp(logGammaSeries(a, x)) : logGammaContinuedFraction(a, x);
}

double gammaP(double a, double x) { return std::exp(logGammaP(a, x)); }

double gammaQ(double a, double x) { return std::exp(logGammaQ(a, x)); }

// --- incomplete beta ---------------------------------------------------------

namespace {

double betaContinuedFraction(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

/// log I_x(a, b) evaluated directly by continued fraction (accurate when x
/// is below the switch point (a + 1) / (a + b + 2)).
double logBetaDirect(double a, double b, double x, double omx) {
  const double logFront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(omx);
  return logFront + std::log(betaContinuedFraction(a, b, x) / a);
}

}  // namespace

double logBetaI(double a, double b, double x, double oneMinusX) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return -kInfinity;
  if (oneMinusX <= 0.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return logBetaDirect(a, b, x, oneMinusX);
  return log1mexp(logBetaDirect(b, a, oneMinusX, x));
}

double betaI(double a, double b, double x) { return std::exp(logBetaI(a, b, x, 1.0 - x)); }

double betaIComplement(double a, double b, double x, double oneMinusX) {
  return std::exp(logBetaI(b, a, oneMinusX, x));
}

// --- distributions -----------------------------------------------------------

double chiSquaredLogCdf(double x, double df) { return logGammaP(0.5 * df, 0.5 * x); }
double chiSquaredLogSf(double x, double df) { return logGammaQ(0.5 * df, 0.5 * x); }
double chiSquaredCdf(double x, double df) { return std::exp(chiSquaredLogCdf(x, df)); }
double chiSquaredSf(double x, double df) { return std::exp(chiSquaredLogSf(x, df)); }

double fisherLogCdf(double x, double d1, double d2) {
  if (x <= 0.0) return -kInfinity;
  if (std::isinf(x)) return 0.0;
  const double denom = d1 * x + d2;
  return logBetaI(0.5 * d1, 0.5 * d2, d1 * x / denom, d2 / denom);
}

double fisherLogSf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return -kInfinity;
  const double denom = d1 * x + d2;
  return logBetaI(0.5 * d2, 0.5 * d1, d2 / denom, d1 * x / denom);
}

double fisherCdf(double x, double d1, double d2) { return std::exp(fisherLogCdf(x, d1, d2)); }
double fisherSf(double x, double d1, double d2) { return std::exp(fisherLogSf(x, d1, d2)); }

double studentTwoSided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double denom = df + t2;
  return std::exp(logBetaI(0.5 * df, 0.5, df / denom, t2 / denom));
}

double studentSf(double t, double df) {
  const double half = 0.5 * studentTwoSided(t, df);
  return t >= 0.0 ? half : 1.0 - half;
}

double studentCdf(double t, double df) { return studentSf(-t, df); }

double studentQuantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("t quantile needs p in (0, 1)");
  if (p == 0.5) return 0.0;
  const double tail = p < 0.5 ? p : 1.0 - p;
  // Find t > 0 with P(T > t) = tail.
  double lo = 0.0, hi = 1.0;
  while (studentSf(hi, df) > tail) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("t quantile bracket failed");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (studentSf(mid, df) > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  return p < 0.5 ? -t : t;
}

}  // namespace outsel::special
