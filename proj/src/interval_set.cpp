#include "outsel/interval_set.hpp"

#include "outsel/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace outsel {

IntervalSet::IntervalSet(std::initializer_list<Interval> pieces) : pieces_(pieces) {
  canonicalize();
}

IntervalSet::IntervalSet(std::vector<Interval> pieces) : pieces_(std::move(pieces)) {
  canonicalize();
}

void IntervalSet::canonicalize() {
  for (const auto& iv : pieces_) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw NumericalError("NaN interval endpoint");
  }
  std::erase_if(pieces_, [](const Interval& iv) { return iv.lo > iv.hi; });
  std::sort(pieces_.begin(), pieces_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  merged.reserve(pieces_.size());
  for (const auto& iv : pieces_) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  pieces_ = std::move(merged);
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == pieces_.begin()) return false;
  return std::prev(it)->contains(x);
}

bool IntervalSet::isReal() const {
  return pieces_.size() == 1 && pieces_[0].lo == -kInf && pieces_[0].hi == kInf;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = pieces_;
  all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> out;
  size_t i = 0, j = 0;
  while (i < pieces_.size() && j < other.pieces_.size()) {
    const auto& a = pieces_[i];
    const auto& b = other.pieces_[j];
    const double lo = std::max(a.lo, b.lo);
    const double hi = std::min(a.hi, b.hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::complement() const {
  std::vector<Interval> out;
  double cursor = -kInf;
  for (const auto& iv : pieces_) {
    if (iv.lo > cursor) out.push_back({cursor, iv.lo});
    cursor = iv.hi;
  }
  if (cursor != kInf) out.push_back({cursor, kInf});
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::mapIncreasing(const std::function<double(double)>& f) const {
  std::vector<Interval> out;
  out.reserve(pieces_.size());
  for (const auto& iv : pieces_) out.push_back({f(iv.lo), f(iv.hi)});
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::scaled(double s) const {
  return mapIncreasing([s](double x) { return s * x; });
}

std::string IntervalSet::toString() const {
  if (pieces_.empty()) return "{}";
  std::ostringstream os;
  os.precision(6);
  for (size_t k = 0; k < pieces_.size(); ++k) {
    if (k) os << " U ";
    const auto& iv = pieces_[k];
    os << (iv.lo == -kInf ? "(" : "[");
    if (iv.lo == -kInf) {
      os << "-inf";
    } else {
      os << iv.lo;
    }
    os << ", ";
    if (iv.hi == kInf) {
      os << "inf)";
    } else {
      os << iv.hi << "]";
    }
  }
  return os.str();
}

IntervalSet uniteAll(const std::vector<IntervalSet>& sets) {
  std::vector<Interval> all;
  for (const auto& s : sets) all.insert(all.end(), s.pieces().begin(), s.pieces().end());
  return IntervalSet(std::move(all));
}

IntervalSet intersectAll(const std::vector<IntervalSet>& sets) {
  IntervalSet acc = IntervalSet::real();
  for (const auto& s : sets) {
    acc = acc.intersect(s);
    if (acc.isEmpty()) break;
  }
  return acc;
}

IntervalSet solveQuadraticSignSet(double A, double B, double C) {
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (scale == 0.0) return IntervalSet::real();
  const double a = A / scale, b = B / scale, c = C / scale;

  if (std::abs(a) < kDegenerateCoefficient) {
    if (std::abs(b) < kDegenerateCoefficient) {
      return c >= 0.0 ? IntervalSet::real() : IntervalSet::empty();
    }
    const double root = -c / b;
    return b > 0.0 ? IntervalSet({{root, kInf}}) : IntervalSet({{-kInf, root}});
  }

  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return a > 0.0 ? IntervalSet::real() : IntervalSet::empty();

  // Cancellation-free roots.
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double r1, r2;
  if (q == 0.0) {
    r1 = r2 = 0.0;
  } else {
    r1 = q / a;
    r2 = c / q;
  }
  const double lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (a > 0.0) return IntervalSet({{-kInf, lo}, {hi, kInf}});
  return IntervalSet({{lo, hi}});
}

}  // namespace outsel
