#include "oracles.hpp"

#include "outsel/csv.hpp"
#include "outsel/inference.hpp"
#include "outsel/selection_event.hpp"
#include "outsel/special_functions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <doctest.h>

using namespace outsel;
namespace bm = boost::math;

namespace {

Dataset stackloss() {
  return validateDataset(readCsvFile(OUTSEL_FIXTURES "/stackloss.csv"), "stack.loss", true);
}

}  // namespace

TEST_CASE("untruncated z inference is classical") {
  std::mt19937_64 rng(1);
  const Dataset d = oracle::randomCooksInstance(rng);
  const auto fit = fitOls(d);
  const auto whole = SelectionEvent::wholeSpace(d.n());
  const bm::normal_distribution<double> N;
  for (Index j = 0; j < d.p(); ++j) {
    const auto c = coefficientContrast(fit, j, d, 0.8);
    CHECK(c.estimate == doctest::Approx(fit.coefficients(j)).epsilon(1e-12));
    const auto z = selectiveZInference(c, whole, 0.1);
    CHECK(z.truncation.isReal());
    const double want = 2 * bm::cdf(bm::complement(N, std::abs(c.z)));
    CHECK(std::abs(z.pTwoSided - want) < 1e-9);
    const double half = bm::quantile(N, 0.95) * 0.8 * c.nuNorm;
    CHECK(std::abs(z.ci.lo - (c.estimate - half)) < 1e-9);
    CHECK(std::abs(z.ci.hi - (c.estimate + half)) < 1e-9);
  }
}

TEST_CASE("untruncated chi-squared and F tests are classical") {
  std::mt19937_64 rng(2);
  Dataset d = oracle::randomCooksInstance(rng);
  while (d.p() < 3) d = oracle::randomCooksInstance(rng);
  const auto fit = fitOls(d);
  const auto whole = SelectionEvent::wholeSpace(d.n());
  const IndexSet g{1, 2};

  const auto chi = groupChi2Test(d, fit, g, whole, 1.3);
  const bm::chi_squared_distribution<double> C(2.0);
  CHECK(std::abs(chi.pValue - bm::cdf(bm::complement(C, chi.statistic * chi.statistic))) < 1e-9);

  const auto F = selectiveFTest(d, fit, g, whole);
  const double df2 = static_cast<double>(d.n() - d.p());
  const bm::fisher_f_distribution<double> Fd(2.0, df2);
  // Classical F from nested residual sums of squares.
  Matrix reduced(d.n(), d.p() - 2);
  reduced.col(0) = d.X.col(0);
  for (Index j = 3; j < d.p(); ++j) reduced.col(j - 2) = d.X.col(j);
  const double rss1 = (d.y - reduced * oracle::normalEquations(reduced, d.y)).squaredNorm();
  const double rss2 = (d.y - d.X * oracle::normalEquations(d.X, d.y)).squaredNorm();
  const double stat = ((rss1 - rss2) / 2.0) / (rss2 / df2);
  CHECK(F.statistic == doctest::Approx(stat).epsilon(1e-9));
  CHECK(std::abs(F.pValue - bm::cdf(bm::complement(Fd, stat))) < 1e-9);
  CHECK(std::abs(F.pValue - naiveGroupF(d, fit, g).pValue) < 1e-9);
}

TEST_CASE("untruncated single-coefficient F equals the two-sided t test") {
  std::mt19937_64 rng(3);
  const Dataset d = oracle::randomCooksInstance(rng);
  const auto fit = fitOls(d);
  const auto whole = SelectionEvent::wholeSpace(d.n());
  const Matrix XtXinv = (d.X.transpose() * d.X).inverse();
  const double df = static_cast<double>(d.n() - d.p());
  const bm::students_t_distribution<double> T(df);
  for (Index j = 0; j < d.p(); ++j) {
    const double se = fit.sigmaRefit * std::sqrt(XtXinv(j, j));
    const double t = fit.coefficients(j) / se;
    const double want = 2 * bm::cdf(bm::complement(T, std::abs(t)));
    const auto naive = naiveCoefficient(fit, j, 0.05);
    CHECK(std::abs(naive.pValue - want) < 1e-9);
    CHECK(naive.ci.hi - fit.coefficients(j) == doctest::Approx(bm::quantile(T, 0.975) * se).epsilon(1e-9));
    CHECK(std::abs(selectiveFTest(d, fit, {j}, whole).pValue - want) < 1e-9);
  }
}

TEST_CASE("single-coefficient chi test equals the sign-conditioned z test") {
  std::mt19937_64 rng(4);
  int compared = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = oracle::randomCooksInstance(rng);
    const auto det = detectCooks(d, 3.0);
    if (static_cast<Index>(det.inliers.size()) <= d.p()) continue;
    const auto fit = fitOls(d, det.inliers);
    const auto c = coefficientContrast(fit, 1, d, 1.0);
    const IntervalSet E = zTruncationSet(c, det.event);
    // Conditioning on the sign of Z: |Z| restricted to the matching half of E.
    std::vector<Interval> pieces;
    for (const auto& p : E.pieces()) {
      if (c.z >= 0 && p.hi >= 0) pieces.push_back({std::max(p.lo, 0.0), p.hi});
      if (c.z < 0 && p.lo <= 0) pieces.push_back({std::max(-p.hi, 0.0), -p.lo});
    }
    const IntervalSet reflected(pieces);
    const double want = oracle::quadratureSf(BaseFamily::Normal, 0.0, 0.0, reflected, std::abs(c.z));
    const auto chi = groupChi2Test(d, fit, {1}, det.event, 1.0);
    CHECK(chi.statistic == doctest::Approx(std::abs(c.z)).epsilon(1e-9));
    CHECK(chi.pValue == doctest::Approx(want).epsilon(1e-7).scale(1e-12));
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("selective interval endpoints solve the pivot equations") {
  std::mt19937_64 rng(5);
  const Dataset d = oracle::randomCooksInstance(rng);
  const auto det = detectCooks(d, 3.0);
  const auto fit = fitOls(d, det.inliers);
  const auto c = coefficientContrast(fit, 1, d, 1.0);
  const auto z = selectiveZInference(c, det.event, 0.05);
  const double scale = c.sigma * c.nuNorm;
  const auto atLo = TruncatedDistribution::normal(z.ci.lo / scale, z.truncation);
  const auto atHi = TruncatedDistribution::normal(z.ci.hi / scale, z.truncation);
  CHECK(atLo.cdf(c.z) == doctest::Approx(0.975).epsilon(1e-8));
  CHECK(atHi.cdf(c.z) == doctest::Approx(0.025).epsilon(1e-8));
  const Vector x0 = d.X.row(0).transpose();
  const auto pc = surfaceContrast(fit, x0, d, 1.0);
  const auto pi = predictionInterval(pc, det.event, 0.05);
  const auto ci = selectiveZInference(pc, det.event, 0.05).ci;
  CHECK(pi.hi - pi.lo > ci.hi - ci.lo);
}

TEST_CASE("stack loss report at cutoff 4") {
  const Dataset d = stackloss();
  const auto det = detect(d, {DetectionMethod::Cooks, 4.0});
  const auto rep = buildReport(d, det, {});
  REQUIRE(rep.coefficients.size() == 4);
  const auto& air = rep.coefficients[1];
  CHECK(air.estimate == doctest::Approx(0.8891).epsilon(5e-4 / 0.8891));
  CHECK(air.naiveP == doctest::Approx(1.31e-6).epsilon(0.02));
  CHECK(air.selectiveP == doctest::Approx(0.00403).epsilon(0.05));
  const auto& water = rep.coefficients[2];
  CHECK(water.truncation == IntervalSet::nonNegative());
  CHECK(water.selectiveP == water.naiveP);
}

TEST_CASE("report modes and validation") {
  const Dataset d = stackloss();
  const auto det = detect(d, {DetectionMethod::Cooks, 4.0});
  InferenceOptions known{SigmaMode::Known, 3.0, 0.05, true};
  const auto rep = buildReport(d, det, known);
  CHECK(rep.method == "SELECT-KNOWN");
  for (const auto& c : rep.coefficients) {
    REQUIRE(c.selectiveCi.has_value());
    CHECK(c.selectiveCi->lo <= c.estimate);
    CHECK(c.estimate <= c.selectiveCi->hi);
    CHECK(c.statistic == "Z");
  }
  InferenceOptions bad{SigmaMode::Known, -1.0, 0.05, true};
  CHECK_THROWS_AS(buildReport(d, det, bad), ValidationError);
}
