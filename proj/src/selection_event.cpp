#include "outsel/selection_event.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace outsel {

double QuadraticConstraint::evaluate(const Vector& y, const Vector& residual) const {
  double value = constant;
  if (projectorScale != 0.0) value += projectorScale * residual.squaredNorm();
  for (const auto& t : residualSquares) value += t.weight * residual(t.index) * residual(t.index);
  for (const auto& t : denseSquares) {
    const double d = t.q.dot(y);
    value += t.weight * d * d;
  }
  for (const auto& t : residualLinear) value += t.weight * residual(t.index);
  if (denseLinear.size() > 0) value += denseLinear.dot(y);
  return value;
}

QuadraticConstraint QuadraticConstraint::affine(Vector a, double b) {
  QuadraticConstraint c;
  c.denseLinear = std::move(a);
  c.constant = b;
  return c;
}

namespace {

bool usesResidual(const QuadraticConstraint& c) {
  return c.projectorScale != 0.0 || !c.residualSquares.empty() || !c.residualLinear.empty();
}

/// Basis vectors pushed through P_X^perp, laid out row-per-observation.
struct ResidualBasis {
  Eigen::Matrix<double, Eigen::Dynamic, 3> rows;  // n x 3, unused columns zero
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
};

ReducedQuadratic reduceOne(const QuadraticConstraint& c, std::span<const Vector> basis,
                           const ResidualBasis& rb) {
  ReducedQuadratic out;
  const size_t k = basis.size();
  out.constant = c.constant;
  if (c.projectorScale != 0.0) out.quad += c.projectorScale * rb.gram;
  for (const auto& t : c.residualSquares) {
    const Eigen::Vector3d v = rb.rows.row(t.index).transpose();
    out.quad.noalias() += t.weight * v * v.transpose();
  }
  for (const auto& t : c.denseSquares) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (size_t j = 0; j < k; ++j) v(static_cast<Index>(j)) = t.q.dot(basis[j]);
    out.quad.noalias() += t.weight * v * v.transpose();
  }
  for (const auto& t : c.residualLinear) out.lin += t.weight * rb.rows.row(t.index).transpose();
  if (c.denseLinear.size() > 0) {
    for (size_t j = 0; j < k; ++j) out.lin(static_cast<Index>(j)) += c.denseLinear.dot(basis[j]);
  }
  return out;
}

}  // namespace

SelectionEvent::SelectionEvent(Index dimension,
                               std::shared_ptr<const ColumnSpaceProjector> projector,
                               std::vector<Group> groups)
    : dimension_(dimension), projector_(std::move(projector)), groups_(std::move(groups)) {
  if (groups_.empty()) throw ValidationError("selection event needs at least one group");
  if (projector_ && projector_->dim() != dimension_) {
    throw ValidationError("projector dimension does not match event dimension");
  }
  for (const auto& g : groups_) {
    for (const auto& c : g) {
      if (usesResidual(c) && !projector_) {
        throw ValidationError("constraint uses residual terms but the event has no projector");
      }
      for (const auto& t : c.residualSquares) {
        if (t.index < 0 || t.index >= dimension_) throw ValidationError("constraint index out of range");
      }
      for (const auto& t : c.residualLinear) {
        if (t.index < 0 || t.index >= dimension_) throw ValidationError("constraint index out of range");
      }
      for (const auto& t : c.denseSquares) {
        if (t.q.size() != dimension_) throw ValidationError("rank-one term has wrong dimension");
      }
      if (c.denseLinear.size() != 0 && c.denseLinear.size() != dimension_) {
        throw ValidationError("linear term has wrong dimension");
      }
    }
  }
}

SelectionEvent SelectionEvent::wholeSpace(Index dimension) {
  return SelectionEvent(dimension, nullptr, {Group{}});
}

size_t SelectionEvent::constraintCount() const {
  size_t total = 0;
  for (const auto& g : groups_) total += g.size();
  return total;
}

std::vector<double> SelectionEvent::constraintValues(const Vector& y) const {
  if (y.size() != dimension_) throw ValidationError("response dimension mismatch");
  const Vector residual = projector_ ? projector_->residual(y) : Vector();
  std::vector<double> values;
  values.reserve(constraintCount());
  for (const auto& g : groups_) {
    for (const auto& c : g) values.push_back(c.evaluate(y, residual));
  }
  return values;
}

bool SelectionEvent::contains(const Vector& y) const {
  if (y.size() != dimension_) throw ValidationError("response dimension mismatch");
  const Vector residual = projector_ ? projector_->residual(y) : Vector();
  for (const auto& g : groups_) {
    bool all = true;
    for (const auto& c : g) {
      if (c.evaluate(y, residual) < 0.0) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

std::vector<ReducedQuadratic> SelectionEvent::restrict(std::span<const Vector> basis,
                                                       Execution exec) const {
  if (basis.empty() || basis.size() > 3) throw ValidationError("restriction basis must have 1..3 vectors");
  for (const auto& b : basis) {
    if (b.size() != dimension_) throw ValidationError("basis vector dimension mismatch");
  }
  ResidualBasis rb;
  if (projector_) {
    rb.rows = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(dimension_, 3);
    for (size_t j = 0; j < basis.size(); ++j) {
      rb.rows.col(static_cast<Index>(j)) = projector_->residual(basis[j]);
    }
    rb.gram = rb.rows.transpose() * rb.rows;
  }

  std::vector<const QuadraticConstraint*> flat;
  flat.reserve(constraintCount());
  for (const auto& g : groups_) {
    for (const auto& c : g) flat.push_back(&c);
  }
  std::vector<ReducedQuadratic> out(flat.size());
  const auto count = static_cast<std::ptrdiff_t>(flat.size());
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) out[static_cast<size_t>(i)] = reduceOne(*flat[static_cast<size_t>(i)], basis, rb);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) out[static_cast<size_t>(i)] = reduceOne(*flat[static_cast<size_t>(i)], basis, rb);
  }
  return out;
}

std::vector<QuadraticConstraint::LineCoefficients> SelectionEvent::lineCoefficients(
    const Vector& z, const Vector& v, Execution exec) const {
  const std::array<Vector, 2> basis{z, v};
  const auto reduced = restrict(basis, exec);
  std::vector<QuadraticConstraint::LineCoefficients> out;
  out.reserve(reduced.size());
  for (const auto& r : reduced) {
    out.push_back({r.quad(1, 1), 2.0 * r.quad(0, 1) + r.lin(1), r.quad(0, 0) + r.lin(0) + r.constant});
  }
  return out;
}

IntervalSet sliceEventOnLine(const SelectionEvent& event, const Vector& z, const Vector& v,
                             Execution exec) {
  const auto coeffs = event.lineCoefficients(z, v, exec);
  std::vector<IntervalSet> groupSets;
  size_t offset = 0;
  for (const auto& g : event.groups()) {
    IntervalSet acc = IntervalSet::real();
    for (size_t k = 0; k < g.size(); ++k) {
      const auto& c = coeffs[offset + k];
      acc = acc.intersect(solveQuadraticSignSet(c.A, c.B, c.C));
      if (acc.isEmpty()) break;
    }
    offset += g.size();
    groupSets.push_back(std::move(acc));
  }
  IntervalSet result = uniteAll(groupSets);
  if (result.isEmpty()) {
    throw NumericalError("line slice of the selection event is empty; the event and the "
                         "observed response are inconsistent");
  }
  return result;
}

// --- trigonometric constraints along the F curve ---------------------------

double TrigQuadratic::value(double t) const {
  return c0 + c1 * std::cos(t) + s1 * std::sin(t) + c2 * std::cos(2 * t) + s2 * std::sin(2 * t);
}

double TrigQuadratic::derivative(double t) const {
  return -c1 * std::sin(t) + s1 * std::cos(t) - 2 * c2 * std::sin(2 * t) + 2 * s2 * std::cos(2 * t);
}

double TrigQuadratic::scale() const {
  return std::abs(c0) + std::abs(c1) + std::abs(s1) + std::abs(c2) + std::abs(s2);
}

TrigQuadratic toTrigQuadratic(const ReducedQuadratic& q, double r) {
  TrigQuadratic f;
  const double r2 = r * r;
  f.c0 = q.quad(0, 0) + q.lin(0) + q.constant + 0.5 * r2 * (q.quad(1, 1) + q.quad(2, 2));
  f.s1 = r * (2.0 * q.quad(0, 1) + q.lin(1));
  f.c1 = r * (2.0 * q.quad(0, 2) + q.lin(2));
  f.c2 = 0.5 * r2 * (q.quad(2, 2) - q.quad(1, 1));
  f.s2 = r2 * q.quad(1, 2);
  return f;
}

TrigGrid::TrigGrid(double lo_, double hi_, int cells) : lo(lo_), hi(hi_) {
  const auto nodes = static_cast<size_t>(cells) + 1;
  theta.resize(nodes);
  cos1.resize(nodes);
  sin1.resize(nodes);
  cos2.resize(nodes);
  sin2.resize(nodes);
  for (size_t k = 0; k < nodes; ++k) {
    const double t = k + 1 == nodes ? hi : lo + (hi - lo) * static_cast<double>(k) / cells;
    theta[k] = t;
    cos1[k] = std::cos(t);
    sin1[k] = std::sin(t);
    cos2[k] = std::cos(2 * t);
    sin2[k] = std::sin(2 * t);
  }
}

namespace {

/// Root of a continuous g on [a, b] with (g(a) >= 0) != (g(b) >= 0).
template <class G>
double bisectSign(const G& g, double a, double b, double tol) {
  const bool signA = g(a) >= 0.0;
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double mid = 0.5 * (a + b);
    if ((g(mid) >= 0.0) == signA) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

IntervalSet trigSignSet(const TrigQuadratic& f, const TrigGrid& grid, double rootTolerance,
                        int* nearTangencies) {
  const double scale = f.scale();
  if (scale == 0.0) return IntervalSet({{grid.lo, grid.hi}});
  const double tangencyTol = 1e-12 * scale;
  auto value = [&f](double t) { return f.value(t); };
  auto slope = [&f](double t) { return f.derivative(t); };

  std::vector<double> breaks{grid.lo};
  const size_t nodes = grid.theta.size();
  double prev = grid.valueAt(f, 0);
  for (size_t k = 1; k < nodes; ++k) {
    const double a = grid.theta[k - 1], b = grid.theta[k];
    const double cur = grid.valueAt(f, k);
    if ((prev >= 0.0) != (cur >= 0.0)) {
      breaks.push_back(bisectSign(value, a, b, rootTolerance));
    } else {
      const double da = slope(a), db = slope(b);
      if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
        const double c = bisectSign(slope, a, b, rootTolerance);
        const double fc = value(c);
        if ((fc >= 0.0) != (prev >= 0.0)) {
          breaks.push_back(bisectSign(value, a, c, rootTolerance));
          breaks.push_back(bisectSign(value, c, b, rootTolerance));
        } else if (std::abs(fc) <= tangencyTol && nearTangencies) {
          ++*nearTangencies;
        }
      }
    }
    prev = cur;
  }
  breaks.push_back(grid.hi);

  std::vector<Interval> pieces;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (b < a) continue;
    if (value(0.5 * (a + b)) >= 0.0) pieces.push_back({a, b});
  }
  // Isolated touch points at the ends of the range.
  if (value(grid.lo) >= 0.0) pieces.push_back({grid.lo, grid.lo});
  if (value(grid.hi) >= 0.0) pieces.push_back({grid.hi, grid.hi});
  return IntervalSet(std::move(pieces));
}

CurveSliceResult sliceEventOnFCurve(const SelectionEvent& event, const Vector& z,
                                    const Vector& wDelta, const Vector& w2, double r, double d1,
                                    double d2, const CurveSliceOptions& options, Execution exec) {
  if (!(r > 0.0)) throw ValidationError("curve radius must be positive");
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw ValidationError("degrees of freedom must be positive");
  const std::array<Vector, 3> basis{z, wDelta, w2};
  const auto reduced = event.restrict(basis, exec);
  std::vector<TrigQuadratic> trig(reduced.size());
  for (size_t i = 0; i < reduced.size(); ++i) trig[i] = toTrigQuadratic(reduced[i], r);

  constexpr double halfPi = std::numbers::pi / 2;
  CurveSliceResult result;
  int cells = options.gridNodes;
  for (int attempt = 0;; ++attempt) {
    const TrigGrid grid(0.0, halfPi, cells);
    std::vector<IntervalSet> perConstraint(trig.size());
    int tangencies = 0;
    const auto count = static_cast<std::ptrdiff_t>(trig.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : tangencies)
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        int local = 0;
        perConstraint[static_cast<size_t>(i)] = trigSignSet(trig[static_cast<size_t>(i)], grid, options.rootTolerance, &local);
        tangencies += local;
      }
    } else {
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        perConstraint[static_cast<size_t>(i)] = trigSignSet(trig[static_cast<size_t>(i)], grid, options.rootTolerance, &tangencies);
      }
    }

    std::vector<IntervalSet> groupSets;
    size_t offset = 0;
    for (const auto& g : event.groups()) {
      IntervalSet acc({{0.0, halfPi}});
      for (size_t k = 0; k < g.size(); ++k) {
        acc = acc.intersect(perConstraint[offset + k]);
        if (acc.isEmpty()) break;
      }
      offset += g.size();
      groupSets.push_back(std::move(acc));
    }
    result.set = uniteAll(groupSets);
    result.nearTangencies = tangencies;
    if (tangencies == 0 || attempt >= options.maxRefinements) break;
    cells *= 4;
    ++result.refinements;
  }

  const double ratio = d2 / d1;
  result.set = result.set.mapIncreasing([&](double theta) {
    if (theta >= halfPi) return kInf;
    if (theta <= 0.0) return 0.0;
    const double t = std::tan(theta);
    return ratio * t * t;
  });
  if (result.set.isEmpty()) {
    throw NumericalError("F-curve slice of the selection event is empty; the event and the "
                         "observed response are inconsistent");
  }
  return result;
}

}  // namespace outsel
