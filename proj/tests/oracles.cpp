#include "oracles.hpp"

#include "outsel/inference.hpp"
#include "outsel/selection_event.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

using outsel::Index;
using outsel::Interval;
using outsel::kInf;

Dataset randomCooksInstance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nDist(15, 40), pDist(2, 4), outDist(0, 3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> shift(3.0, 6.0);
  const Index n = nDist(rng), p = pDist(rng);
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (Index j = 1; j < p; ++j) X(i, j) = normal(rng);
  }
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = X.row(i).sum() + normal(rng);
  const int outliers = outDist(rng);
  for (int k = 0; k < outliers; ++k) y(k) += (k % 2 ? -1.0 : 1.0) * shift(rng);
  return outsel::makeDataset(y, X, {}, true);
}

IntervalSet gridSet(const std::function<bool(double)>& member, double lo, double hi, int nodes,
                    double tol) {
  auto refine = [&](double a, double b, bool aIn) {
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      (member(mid) == aIn ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };
  std::vector<Interval> pieces;
  double prevT = lo;
  bool prevIn = member(lo);
  double start = prevIn ? lo : kInf;
  for (int k = 1; k <= nodes; ++k) {
    const double t = lo + (hi - lo) * k / nodes;
    const bool in = member(t);
    if (in != prevIn) {
      const double edge = refine(prevT, t, prevIn);
      if (in) {
        start = edge;
      } else {
        pieces.push_back({start, edge});
      }
    }
    prevT = t;
    prevIn = in;
  }
  if (prevIn) pieces.push_back({start, hi});
  return IntervalSet(pieces);
}

double endpointDiscrepancy(const IntervalSet& a, const IntervalSet& b, double lo, double hi) {
  const IntervalSet window({Interval{lo, hi}});
  const auto& pa = a.intersect(window).pieces();
  const auto& pb = b.intersect(window).pieces();
  if (pa.size() != pb.size()) return kInf;
  double worst = 0.0;
  for (size_t k = 0; k < pa.size(); ++k) {
    worst = std::max({worst, std::abs(pa[k].lo - pb[k].lo), std::abs(pa[k].hi - pb[k].hi)});
  }
  return worst;
}

namespace {

bool sameDetection(const Dataset& data, const Vector& y, double lambda, const IndexSet& outliers) {
  Dataset moved = data;
  moved.y = y;
  return outsel::detectCooks(moved, lambda, outsel::Execution::Serial).outliers == outliers;
}

}  // namespace

SliceCheck checkLineSlice(const Dataset& data, double lambda, Index j) {
  const auto det = outsel::detectCooks(data, lambda, outsel::Execution::Serial);
  const auto fit = outsel::fitOls(data, det.inliers);
  const auto c = outsel::coefficientContrast(fit, j, data, 1.0);
  const Vector v = c.nu / c.nuNorm;
  const IntervalSet got = outsel::sliceEventOnLine(det.event, c.zResidual, v, outsel::Execution::Serial);

  double reach = 10.0 * (data.y.norm() + 1.0);
  for (const auto& piece : got.pieces()) {
    if (std::isfinite(piece.lo)) reach = std::max(reach, 2.0 * std::abs(piece.lo));
    if (std::isfinite(piece.hi)) reach = std::max(reach, 2.0 * std::abs(piece.hi));
  }
  auto member = [&](double t) { return sameDetection(data, c.zResidual + t * v, lambda, det.outliers); };
  const IntervalSet want = gridSet(member, -reach, reach, 40000);
  return {endpointDiscrepancy(got, want, -reach, reach), got.size()};
}

SliceCheck checkCurveSlice(const Dataset& data, double lambda, Index j) {
  const auto det = outsel::detectCooks(data, lambda, outsel::Execution::Serial);
  const auto fit = outsel::fitOls(data, det.inliers);
  const auto spec = outsel::makeFTestSpec(data, fit, {j});
  const auto sliced = outsel::sliceEventOnFCurve(det.event, spec.z, spec.wDelta, spec.w2, spec.r,
                                                 spec.d1, spec.d2, {}, outsel::Execution::Serial);
  const double ratio = spec.d1 / spec.d2;
  const IntervalSet got = sliced.set.mapIncreasing([&](double F) {
    return std::isinf(F) ? std::numbers::pi / 2 : std::atan(std::sqrt(ratio * F));
  });
  auto member = [&](double theta) {
    const Vector y = spec.z + spec.r * std::sin(theta) * spec.wDelta + spec.r * std::cos(theta) * spec.w2;
    return sameDetection(data, y, lambda, det.outliers);
  };
  const IntervalSet want = gridSet(member, 0.0, std::numbers::pi / 2, 40000);
  return {endpointDiscrepancy(got, want, 0.0, std::numbers::pi / 2), got.size()};
}

double logDensity(outsel::BaseFamily family, double a, double b, double x) {
  using std::lgamma;
  using std::log;
  switch (family) {
    case outsel::BaseFamily::Normal:
      return -0.5 * (x - a) * (x - a) - 0.5 * log(2.0 * std::numbers::pi);
    case outsel::BaseFamily::ChiSquared:
      if (x <= 0.0) return -kInf;
      return (a / 2 - 1) * log(x) - x / 2 - (a / 2) * log(2.0) - lgamma(a / 2);
    case outsel::BaseFamily::Fisher: {
      if (x <= 0.0) return -kInf;
      const double lbeta = lgamma(a / 2) + lgamma(b / 2) - lgamma((a + b) / 2);
      return (a / 2) * log(a / b) + (a / 2 - 1) * log(x) - ((a + b) / 2) * log1p(a * x / b) - lbeta;
    }
  }
  return -kInf;
}

namespace {

double integratePiece(const std::function<double(double)>& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (std::isinf(lo) && std::isinf(hi)) {
    boost::math::quadrature::exp_sinh<double> tail;
    return tail.integrate([&](double t) { return f(-t); }, 0.0, kInf) +
           tail.integrate(f, 0.0, kInf);
  }
  if (std::isinf(hi)) {
    boost::math::quadrature::exp_sinh<double> tail;
    return tail.integrate([&](double t) { return f(lo + t); }, 0.0, kInf);
  }
  if (std::isinf(lo)) {
    boost::math::quadrature::exp_sinh<double> tail;
    return tail.integrate([&](double t) { return f(hi - t); }, 0.0, kInf);
  }
  boost::math::quadrature::tanh_sinh<double> finite;
  return finite.integrate(f, lo, hi);
}

}  // namespace

namespace {

struct Masses {
  double below = 0.0, above = 0.0;
};

Masses quadratureMasses(outsel::BaseFamily family, double a, double b, const IntervalSet& support,
                        double x) {
  // Mode of the base law, then the support point nearest it.
  double mode = a;
  if (family == outsel::BaseFamily::ChiSquared) mode = std::max(a - 2.0, 0.0);
  if (family == outsel::BaseFamily::Fisher) mode = a > 2 ? (a - 2) / a * b / (b + 2) : 0.0;
  const bool positive = family != outsel::BaseFamily::Normal;
  double anchor = std::numeric_limits<double>::quiet_NaN(), best = kInf;
  for (const auto& piece : support.pieces()) {
    const double lo = positive ? std::max(piece.lo, 0.0) : piece.lo;
    if (piece.hi < lo) continue;
    const double nearest = std::clamp(mode, lo, piece.hi);
    if (std::abs(nearest - mode) < best) {
      best = std::abs(nearest - mode);
      anchor = nearest;
    }
  }
  double shift = logDensity(family, a, b, anchor);
  if (!std::isfinite(shift)) shift = logDensity(family, a, b, anchor + 1e-12);
  auto density = [&](double t) {
    const double v = std::exp(logDensity(family, a, b, t) - shift);
    return std::isfinite(v) ? v : 0.0;
  };
  Masses m;
  for (const auto& piece : support.pieces()) {
    const double lo = positive ? std::max(piece.lo, 0.0) : piece.lo;
    if (piece.hi <= lo) continue;
    if (x > lo) m.below += integratePiece(density, lo, std::min(x, piece.hi));
    if (x < piece.hi) m.above += integratePiece(density, std::max(x, lo), piece.hi);
  }
  return m;
}

}  // namespace

double quadratureCdf(outsel::BaseFamily family, double a, double b, const IntervalSet& support,
                     double x) {
  const Masses m = quadratureMasses(family, a, b, support, x);
  return m.below / (m.below + m.above);
}

double quadratureSf(outsel::BaseFamily family, double a, double b, const IntervalSet& support,
                    double x) {
  const Masses m = quadratureMasses(family, a, b, support, x);
  return m.above / (m.below + m.above);
}

namespace {

/// FISTA on the profiled soft-IPOD problem min_u (1/2n)|P(y - u)|^2 + lambda |u|_1,
/// P = I - X X^+.
Vector solveProfiled(const Matrix& P, const Vector& y, double level) {
  const Index n = y.size();
  Vector u = Vector::Zero(n), w = u, prev = u;
  double t = 1.0;
  for (int it = 0; it < 200000; ++it) {
    const Vector g = w + P * (y - w);
    for (Index i = 0; i < n; ++i) {
      u(i) = g(i) > level ? g(i) - level : (g(i) < -level ? g(i) + level : 0.0);
    }
    const double tNext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    w = u + ((t - 1.0) / tNext) * (u - prev);
    if ((u - prev).norm() < 1e-14 * (1.0 + u.norm()) && it > 10) break;
    prev = u;
    t = tNext;
  }
  return u;
}

}  // namespace

MembershipCheck softIpodMembership(const Dataset& data, double lambda, int perturbations,
                                   std::uint64_t seed) {
  const Index n = data.n();
  const Matrix P = Matrix::Identity(n, n) - data.X * data.X.completeOrthogonalDecomposition().pseudoInverse();
  const double level = static_cast<double>(n) * lambda;
  const Vector u0 = solveProfiled(P, data.y, level);
  const auto det = outsel::softIpodEvent(data, lambda, u0);

  auto pattern = [&](const Vector& u) {
    std::vector<int> s(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) s[static_cast<size_t>(i)] = (u(i) > 1e-9) - (u(i) < -1e-9);
    return s;
  };
  const auto base = pattern(u0);

  MembershipCheck out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double scales[] = {0.01, 0.05, 0.2, 0.5, 1.0};
  for (int k = 0; k < perturbations; ++k) {
    Vector y = data.y;
    const double scale = scales[k % 5];
    for (Index i = 0; i < n; ++i) y(i) += scale * normal(rng);
    const Vector u = solveProfiled(P, y, level);
    const Vector g = u + P * (y - u);
    bool ambiguous = false;
    for (Index i = 0; i < n; ++i) {
      if (std::abs(std::abs(g(i)) - level) < 1e-7 * (1.0 + level)) ambiguous = true;
    }
    if (ambiguous) {
      ++out.ambiguous;
      continue;
    }
    ++out.checked;
    if (det.event.contains(y) != (pattern(u) == base)) ++out.mismatches;
  }
  return out;
}

MembershipCheck cooksMembership(const Dataset& data, double lambda, int perturbations,
                                std::uint64_t seed) {
  const auto det = outsel::detectCooks(data, lambda, outsel::Execution::Serial);
  MembershipCheck out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double scales[] = {0.01, 0.05, 0.2, 0.5, 1.0};
  for (int k = 0; k < perturbations; ++k) {
    Dataset moved = data;
    for (Index i = 0; i < data.n(); ++i) moved.y(i) += scales[k % 5] * normal(rng);
    const Vector D = cooksByDeletion(moved);
    const double cut = lambda / static_cast<double>(data.n());
    bool ambiguous = false;
    IndexSet flagged;
    for (Index i = 0; i < data.n(); ++i) {
      if (std::abs(D(i) - cut) < 1e-9 * cut) ambiguous = true;
      if (D(i) >= cut) flagged.push_back(i);
    }
    if (ambiguous) {
      ++out.ambiguous;
      continue;
    }
    ++out.checked;
    if (det.event.contains(moved.y) != (flagged == det.outliers)) ++out.mismatches;
  }
  return out;
}

Vector normalEquations(const Matrix& X, const Vector& y) {
  return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

namespace {

Matrix dropRow(const Matrix& A, Index i) {
  Matrix out(A.rows() - 1, A.cols());
  out << A.topRows(i), A.bottomRows(A.rows() - i - 1);
  return out;
}

Vector dropRow(const Vector& v, Index i) {
  Vector out(v.size() - 1);
  out << v.head(i), v.tail(v.size() - i - 1);
  return out;
}

}  // namespace

Vector cooksByDeletion(const Dataset& data) {
  const Index n = data.n(), p = data.p();
  const Vector beta = normalEquations(data.X, data.y);
  const double s2 = (data.y - data.X * beta).squaredNorm() / static_cast<double>(n - p);
  Vector D(n);
  for (Index i = 0; i < n; ++i) {
    const Vector bi = normalEquations(dropRow(data.X, i), dropRow(data.y, i));
    D(i) = (data.X * (beta - bi)).squaredNorm() / (static_cast<double>(p) * s2);
  }
  return D;
}

Vector dffitsByDeletion(const Dataset& data) {
  const Index n = data.n(), p = data.p();
  const Vector beta = normalEquations(data.X, data.y);
  const Matrix XtXinv = (data.X.transpose() * data.X).inverse();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const Matrix Xi = dropRow(data.X, i);
    const Vector yi = dropRow(data.y, i);
    const Vector bi = normalEquations(Xi, yi);
    const double si = std::sqrt((yi - Xi * bi).squaredNorm() / static_cast<double>(n - 1 - p));
    const double h = data.X.row(i) * XtXinv * data.X.row(i).transpose();
    out(i) = data.X.row(i).dot(beta - bi) / (si * std::sqrt(h));
  }
  return out;
}

}  // namespace oracle
