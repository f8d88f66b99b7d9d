#pragma once

#include "outsel/common.hpp"
#include "outsel/detection.hpp"
#include "outsel/linear_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace outsel {

/// y = X beta + u + eps, eps ~ N(0, sigma^2 I).
struct MeanShiftSpec {
  Matrix X;
  Vector beta;
  Vector u;
  double sigma = 1.0;

  Vector mean() const { return X * beta + u; }
  /// [n] \ support(u)
  IndexSet trueInliers() const;
  void validate() const;
};

/// splitmix64 of (master, index): seeds independent per-replication streams.
std::uint64_t childSeed(std::uint64_t master, std::uint64_t index);

/// First column ones, the rest i.i.d. N(0, 1) rescaled to column norm sqrt(n).
Matrix generateDesign(Index n, Index p, std::uint64_t seed);

/// Draws y for the spec; deterministic in seed. Column 0 is flagged as intercept.
Dataset generateMeanShift(const MeanShiftSpec& spec, std::uint64_t seed);
Dataset generateMeanShift(const MeanShiftSpec& spec, std::mt19937_64& rng);

/// Planted outliers u_i = (s, s, s, -s, -s, ...) on the first `count` rows.
Vector plantedShift(Index n, Index count, double s);

/// beta^M = X_M^+ mu_M.
Vector projectedTarget(const Matrix& X, const Vector& mu, const IndexSet& M);

struct KsResult {
  double statistic = 0.0;
  double pValue = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against U(0, 1) (asymptotic law with
/// Stephens' small-sample correction).
KsResult ksUniform(std::vector<double> values);

/// Kolmogorov survival function P(K > x).
double kolmogorovSf(double x);

struct Rate {
  Index hits = 0;
  Index total = 0;
  double rate() const { return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
  double standardError() const;
};

struct SimReport {
  std::string experiment;
  nlohmann::json config;
  std::uint64_t seed = 0;
  Index requested = 0;
  Index used = 0;
  Index excluded = 0;  ///< |M-hat| <= p
  Index failed = 0;    ///< other numerical failures
  std::vector<std::pair<std::string, Rate>> rates;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> records;

  const Rate& rate(const std::string& name) const;
  double value(const std::string& name) const;
};

nlohmann::json toJson(const SimReport& report);
/// One row per replication; NaN fields print as empty.
std::string recordsCsv(const SimReport& report);

struct CoverageConfig {
  Index n = 100, p = 11;
  double s = 4.0;
  Index outlierCount = 5;
  double cutoff = 4.0;
  double sigma = 1.0;
  double alpha = 0.05;
  Index target = 1;
  int reps = 500;
  std::uint64_t seed = 1;
};

/// Naive and SELECT-EST (plus SELECT-KNOWN) intervals for beta^M_target and
/// beta*_target under beta* = (1, 2, 1, ..., 1) and Cook's detection.
SimReport runCoverage(const CoverageConfig& config, Execution exec = Execution::Parallel);

struct PowerConfig {
  Index n = 100, p = 11;
  double s = 4.0;
  Index outlierCount = 5;
  double cutoff = 4.0;
  double sigma = 1.0;
  double alpha = 0.05;
  std::vector<double> beta1Values{0.0, 0.1, 0.2, 0.3, 0.4};
  /// false: H0 beta_1 = 0 with beta*_k = 1 elsewhere;
  /// true: H0 beta_g = 0 for g = {1, ..., p-1} with beta*_k = 0 for k >= 2.
  bool group = false;
  int reps = 500;
  std::uint64_t seed = 1;
};

/// Rejection rates of NAIVE, SELECT-EST and SELECT-EXACT at level alpha.
SimReport runPower(const PowerConfig& config, Execution exec = Execution::Parallel);

struct UniformityConfig {
  Index n = 50, p = 3;
  double cutoff = 3.0;
  double sigma = 1.0;
  Index target = 1;
  /// Planted outliers (first rows) and their size; M is [n] minus these rows.
  /// With none planted, {M-hat = [n]} has probability below 1e-3 at n=50,
  /// p=3, cutoff 3, so the default plants one.
  Index outlierCount = 1;
  double s = 5.0;
  int accepted = 2000;
  int maxAttemptsPerDraw = 100000;
  std::uint64_t seed = 1;
};

/// Null draws (beta_target = 0) accepted only when Cook's detection returns
/// exactly M; reports KS tests of the selective z, selective F and naive t
/// p-values against U(0, 1).
SimReport runUniformity(const UniformityConfig& config, Execution exec = Execution::Parallel);

}  // namespace outsel
