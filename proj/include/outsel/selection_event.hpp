#pragma once

#include "outsel/common.hpp"
#include "outsel/interval_set.hpp"
#include "outsel/linear_model.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace outsel {

/// Coefficient attached to one coordinate of the residual vector r = P_X^perp y.
struct WeightedIndex {
  Index index;
  double weight;
};

/// Coefficient times (q^T y)^2 for an explicit vector q.
struct RankOneTerm {
  Vector q;
  double weight;
};

/// Quadratic form restricted to span{b_0, ..., b_{k-1}} (k <= 3):
/// value(s) = s^T quad s + lin^T s + constant for y = sum_k s_k b_k.
struct ReducedQuadratic {
  Eigen::Matrix3d quad = Eigen::Matrix3d::Zero();
  Eigen::Vector3d lin = Eigen::Vector3d::Zero();
  double constant = 0.0;

  double at(const Eigen::Vector3d& s) const { return s.dot(quad * s) + lin.dot(s) + constant; }
};

/// One set { y : y^T Q y + a^T y + b >= 0 } stored structurally.
///
/// With r = P_X^perp y for the event's shared projector:
///   y^T Q y = projectorScale * |r|^2 + sum_k w_k r_{i_k}^2 + sum_k w_k (q_k^T y)^2
///   a^T y   = sum_k w_k r_{i_k} + denseLinear^T y
/// The structured terms keep storage O(n) per event for Cook's/DFFITS (and
/// O(|support|) per constraint for soft-IPOD) instead of O(n^2).
struct QuadraticConstraint {
  double projectorScale = 0.0;
  std::vector<WeightedIndex> residualSquares;
  std::vector<RankOneTerm> denseSquares;
  std::vector<WeightedIndex> residualLinear;
  Vector denseLinear;  ///< empty means zero
  double constant = 0.0;

  /// Value at y given its residual r = P_X^perp y (ignored if no residual terms).
  double evaluate(const Vector& y, const Vector& residual) const;

  /// Line restriction A t^2 + B t + C along z + t v.
  struct LineCoefficients {
    double A, B, C;
  };

  static QuadraticConstraint affine(Vector a, double b);
};

/// Disjunctive normal form: a union over groups, each group an intersection.
/// An empty group is the whole space.
class SelectionEvent {
 public:
  using Group = std::vector<QuadraticConstraint>;

  SelectionEvent(Index dimension, std::shared_ptr<const ColumnSpaceProjector> projector,
                 std::vector<Group> groups);

  static SelectionEvent wholeSpace(Index dimension);

  Index dimension() const { return dimension_; }
  const std::vector<Group>& groups() const { return groups_; }
  const ColumnSpaceProjector* projector() const { return projector_.get(); }
  size_t constraintCount() const;

  bool contains(const Vector& y) const;
  /// Per-constraint values, group-major.
  std::vector<double> constraintValues(const Vector& y) const;

  /// Restriction of every constraint to span(basis) (basis.size() <= 3), group-major.
  std::vector<ReducedQuadratic> restrict(std::span<const Vector> basis,
                                         Execution exec = Execution::Parallel) const;

  /// Line coefficients (A, B, C) of every constraint along z + t v, group-major.
  std::vector<QuadraticConstraint::LineCoefficients> lineCoefficients(
      const Vector& z, const Vector& v, Execution exec = Execution::Parallel) const;

 private:
  Index dimension_;
  std::shared_ptr<const ColumnSpaceProjector> projector_;
  std::vector<Group> groups_;
};

/// { t : z + t v in event }. Throws NumericalError if the result is empty.
/// When |v| != 1 the parameter t still indexes z + t v.
IntervalSet sliceEventOnLine(const SelectionEvent& event, const Vector& z, const Vector& v,
                             Execution exec = Execution::Parallel);

/// Grid settings for slicing along the F-statistic curve.
struct CurveSliceOptions {
  int gridNodes = 4096;
  double rootTolerance = 1e-13;  ///< absolute, in the angle parameter
  int maxRefinements = 3;
};

struct CurveSliceResult {
  IntervalSet set;
  /// Touch points where a constraint came within tolerance of zero without
  /// a resolvable sign change; nonzero means the grid was refined.
  int nearTangencies = 0;
  int refinements = 0;
};

/// { F >= 0 : y(F) in event } for
///   y(F) = z + r g1(F) wDelta + r g2(F) w2,
///   g1 = sqrt(k/(1+k)), g2 = sqrt(1/(1+k)), k = d1 F / d2.
///
/// Internally parametrized by the angle theta = atan(sqrt(k)) in [0, pi/2],
/// on which each constraint is a trigonometric polynomial of degree two.
CurveSliceResult sliceEventOnFCurve(const SelectionEvent& event, const Vector& z,
                                    const Vector& wDelta, const Vector& w2, double r, double d1,
                                    double d2, const CurveSliceOptions& options = {},
                                    Execution exec = Execution::Parallel);

/// c0 + c1 cos(t) + s1 sin(t) + c2 cos(2t) + s2 sin(2t)
struct TrigQuadratic {
  double c0 = 0, c1 = 0, s1 = 0, c2 = 0, s2 = 0;
  double value(double t) const;
  double derivative(double t) const;
  double scale() const;
};

/// Composition of a reduced constraint (basis {z, wDelta, w2}) with
/// s(theta) = (1, r sin theta, r cos theta).
TrigQuadratic toTrigQuadratic(const ReducedQuadratic& q, double r);

/// Uniform grid on [lo, hi] with the sines and cosines a TrigQuadratic needs.
struct TrigGrid {
  TrigGrid(double lo, double hi, int cells);
  double lo, hi;
  std::vector<double> theta, cos1, sin1, cos2, sin2;
  double valueAt(const TrigQuadratic& f, size_t node) const {
    return f.c0 + f.c1 * cos1[node] + f.s1 * sin1[node] + f.c2 * cos2[node] + f.s2 * sin2[node];
  }
};

/// Closed set { theta in [grid.lo, grid.hi] : f(theta) >= 0 }.
///
/// Sign changes between nodes are refined by bisection; a derivative sign
/// change without a value sign change triggers a search for the interior
/// extremum, which recovers pairs of roots inside a single cell. Extrema
/// within 1e-12 * scale of zero are counted as near-tangencies.
IntervalSet trigSignSet(const TrigQuadratic& f, const TrigGrid& grid, double rootTolerance,
                        int* nearTangencies = nullptr);

}  // namespace outsel
