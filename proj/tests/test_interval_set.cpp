#include "outsel/interval_set.hpp"

#include <doctest.h>

#include <random>

using namespace outsel;

namespace {

IntervalSet randomSet(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_real_distribution<double> point(-10.0, 10.0), coin(0.0, 1.0);
  std::vector<Interval> pieces;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    double a = point(rng), b = point(rng);
    if (a > b) std::swap(a, b);
    if (coin(rng) < 0.1) a = -kInf;
    if (coin(rng) < 0.1) b = kInf;
    pieces.push_back({a, b});
  }
  return IntervalSet(pieces);
}

bool canonical(const IntervalSet& s) {
  for (size_t k = 0; k < s.size(); ++k) {
    if (s.pieces()[k].lo > s.pieces()[k].hi) return false;
    if (k && !(s.pieces()[k - 1].hi < s.pieces()[k].lo)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("set algebra agrees with pointwise logic") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> probe(-12.0, 12.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const IntervalSet a = randomSet(rng), b = randomSet(rng);
    const IntervalSet u = a.unite(b), i = a.intersect(b), ca = a.complement();
    REQUIRE(canonical(u));
    REQUIRE(canonical(i));
    REQUIRE(canonical(ca));
    for (int k = 0; k < 50; ++k) {
      const double x = probe(rng);
      CHECK(u.contains(x) == (a.contains(x) || b.contains(x)));
      CHECK(i.contains(x) == (a.contains(x) && b.contains(x)));
      CHECK(ca.contains(x) == !a.contains(x));
    }
  }
}

TEST_CASE("de morgan identities") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const IntervalSet a = randomSet(rng), b = randomSet(rng);
    CHECK(a.unite(b).complement() == a.complement().intersect(b.complement()));
    CHECK(a.intersect(b).complement() == a.complement().unite(b.complement()));
  }
}

TEST_CASE("edge cases") {
  CHECK(IntervalSet::empty().complement().isReal());
  CHECK(IntervalSet::real().complement().isEmpty());
  const IntervalSet touching({{0.0, 1.0}, {1.0, 2.0}});
  CHECK(touching.size() == 1);
  CHECK(IntervalSet({{0.0, 1.0}}).complement() == IntervalSet({{-kInf, 0.0}, {1.0, kInf}}));
  CHECK(IntervalSet({{1.0, 2.0}}).scaled(3.0) == IntervalSet({{3.0, 6.0}}));
  CHECK(uniteAll({}).isEmpty());
  CHECK(intersectAll({}).isReal());
}

TEST_CASE("quadratic sign sets match sampling") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), probe(-20.0, 20.0), coin(0.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    double A = coef(rng), B = coef(rng), C = coef(rng);
    if (coin(rng) < 0.15) A = 0.0;
    if (coin(rng) < 0.1) B = 0.0;
    const IntervalSet s = solveQuadraticSignSet(A, B, C);
    for (int k = 0; k < 40; ++k) {
      const double t = probe(rng);
      const double v = A * t * t + B * t + C;
      if (std::abs(v) < 1e-9) continue;
      CHECK(s.contains(t) == (v >= 0.0));
    }
  }
}

TEST_CASE("degenerate quadratics") {
  CHECK(solveQuadraticSignSet(0.0, 0.0, 1.0).isReal());
  CHECK(solveQuadraticSignSet(0.0, 0.0, -1.0).isEmpty());
  const IntervalSet s = solveQuadraticSignSet(1.0, 0.0, -4.0);
  CHECK(s == IntervalSet({{-kInf, -2.0}, {2.0, kInf}}));
  const IntervalSet tangent = solveQuadraticSignSet(-1.0, 0.0, 0.0);
  CHECK(tangent.contains(0.0));
  CHECK(!tangent.contains(1e-3));
}
