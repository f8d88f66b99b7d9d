#pragma once

#include <functional>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

namespace outsel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint closed intervals, endpoints possibly infinite.
///
/// Always canonical: sorted by left endpoint, overlapping or touching pieces
/// merged, so consecutive gaps are strictly positive. Strict inequalities are
/// closed throughout, so complement([a, b]) = (-inf, a] U [b, inf).
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> pieces);
  explicit IntervalSet(std::vector<Interval> pieces);

  static IntervalSet empty() { return {}; }
  static IntervalSet real() { return IntervalSet({Interval{-kInf, kInf}}); }
  static IntervalSet nonNegative() { return IntervalSet({Interval{0.0, kInf}}); }

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool isEmpty() const { return pieces_.empty(); }
  size_t size() const { return pieces_.size(); }
  bool contains(double x) const;
  bool isReal() const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet complement() const;

  /// Image under an increasing map; endpoints map pointwise.
  IntervalSet mapIncreasing(const std::function<double(double)>& f) const;
  /// { s * x : x in this } for s > 0.
  IntervalSet scaled(double s) const;

  std::string toString() const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  void canonicalize();
  std::vector<Interval> pieces_;
};

/// Union or intersection of any number of operands.
IntervalSet uniteAll(const std::vector<IntervalSet>& sets);
IntervalSet intersectAll(const std::vector<IntervalSet>& sets);

/// Threshold below which normalized quadratic/linear coefficients count as zero.
inline constexpr double kDegenerateCoefficient = 1e-14;

/// { t : A t^2 + B t + C >= 0 }.
///
/// Coefficients are normalized by their largest magnitude first; a leading
/// coefficient below kDegenerateCoefficient is treated as linear, and both
/// A and B below it as the constant C.
IntervalSet solveQuadraticSignSet(double A, double B, double C);

}  // namespace outsel
