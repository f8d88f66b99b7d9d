#include "outsel/simulation.hpp"

#include "outsel/inference.hpp"
#include "outsel/report.hpp"
#include "outsel/sigma_estimation.hpp"
#include "outsel/truncated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace outsel {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Outcome { Used, Excluded, Failed };

struct Replication {
  Outcome outcome = Outcome::Failed;
  std::vector<double> record;
};

/// Runs body(r) for every replication; body must not throw.
template <class Body>
void forEachReplication(int reps, Execution exec, Body&& body) {
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < reps; ++r) body(r);
  } else {
    for (int r = 0; r < reps; ++r) body(r);
  }
}

std::vector<std::string> defaultNames(Index p) {
  std::vector<std::string> names{"(Intercept)"};
  for (Index j = 1; j < p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

void checkCommon(Index n, Index p, double sigma, double cutoff, double alpha) {
  if (p < 2) throw ValidationError("simulation needs p >= 2 (intercept plus a covariate)");
  if (n <= p + 1) throw ValidationError("simulation needs n > p + 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
  if (!(cutoff > 0.0)) throw ValidationError("cutoff must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

bool covers(const Interval& ci, double x) { return ci.lo <= x && x <= ci.hi; }

double flag(bool b) { return b ? 1.0 : 0.0; }

/// Counts a 0/1 column over used replications.
Rate tally(const std::vector<Replication>& reps, size_t column) {
  Rate r;
  for (const auto& rep : reps) {
    if (rep.outcome != Outcome::Used) continue;
    ++r.total;
    r.hits += rep.record[column] > 0.5;
  }
  return r;
}

double meanOf(const std::vector<Replication>& reps, size_t column) {
  double sum = 0.0;
  Index count = 0;
  for (const auto& rep : reps) {
    if (rep.outcome != Outcome::Used) continue;
    sum += rep.record[column];
    ++count;
  }
  return count ? sum / static_cast<double>(count) : kNaN;
}

void collect(SimReport& report, const std::vector<Replication>& reps) {
  for (const auto& rep : reps) {
    report.used += rep.outcome == Outcome::Used;
    report.excluded += rep.outcome == Outcome::Excluded;
    report.failed += rep.outcome == Outcome::Failed;
    report.records.push_back(rep.record);
  }
}

}  // namespace

// --- data generation ---------------------------------------------------------

IndexSet MeanShiftSpec::trueInliers() const {
  IndexSet out;
  for (Index i = 0; i < u.size(); ++i) {
    if (u(i) == 0.0) out.push_back(i);
  }
  return out;
}

void MeanShiftSpec::validate() const {
  if (X.rows() != u.size() || X.cols() != beta.size()) {
    throw ValidationError("mean-shift spec dimensions disagree");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be finite and >= 0");
}

std::uint64_t childSeed(std::uint64_t master, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master) ^ (index + 0x632be59bd9b4e019ULL));
}

Matrix generateDesign(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix X(n, p);
  X.col(0).setOnes();
  const double target = std::sqrt(static_cast<double>(n));
  for (Index j = 1; j < p; ++j) {
    for (Index i = 0; i < n; ++i) X(i, j) = normal(rng);
    X.col(j) *= target / X.col(j).norm();
  }
  return X;
}

Dataset generateMeanShift(const MeanShiftSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  std::normal_distribution<double> normal;
  Vector y = spec.mean();
  for (Index i = 0; i < y.size(); ++i) y(i) += spec.sigma * normal(rng);
  Dataset d;
  d.y = std::move(y);
  d.X = spec.X;
  d.columnNames = defaultNames(spec.X.cols());
  d.responseName = "y";
  d.hasIntercept = true;
  return d;
}

Dataset generateMeanShift(const MeanShiftSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generateMeanShift(spec, rng);
}

Vector plantedShift(Index n, Index count, double s) {
  if (count < 0 || count > n) throw ValidationError("outlier count out of range");
  Vector u = Vector::Zero(n);
  // (s, s, s, -s, -s) pattern: the first ceil(3/5) share positive.
  const Index positive = (3 * count + 4) / 5;
  for (Index i = 0; i < count; ++i) u(i) = i < positive ? s : -s;
  return u;
}

Vector projectedTarget(const Matrix& X, const Vector& mu, const IndexSet& M) {
  const Matrix XM = gatherRows(X, M);
  return XM.colPivHouseholderQr().solve(gatherRows(mu, M));
}

// --- Kolmogorov-Smirnov ----------------------------------------------------------

double kolmogorovSf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // P(K <= x) = sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2))
    double cdf = 0.0;
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    for (int k = 1; k < 50; ++k) {
      const double term = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * c);
      cdf += term;
      if (term < 1e-18) break;
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf;
  }
  double sf = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sf += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

KsResult ksUniform(std::vector<double> values) {
  if (values.empty()) throw ValidationError("KS test needs at least one value");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double u = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  return {d, kolmogorovSf((root + 0.12 + 0.11 / root) * d)};
}

// --- reports -----------------------------------------------------------------------

double Rate::standardError() const {
  if (total == 0) return 0.0;
  const double q = rate();
  return std::sqrt(q * (1.0 - q) / static_cast<double>(total));
}

const Rate& SimReport::rate(const std::string& name) const {
  for (const auto& [key, r] : rates) {
    if (key == name) return r;
  }
  throw ValidationError("no rate named '" + name + "'");
}

double SimReport::value(const std::string& name) const {
  for (const auto& [key, v] : values) {
    if (key == name) return v;
  }
  throw ValidationError("no value named '" + name + "'");
}

json toJson(const SimReport& report) {
  json rates = json::object();
  for (const auto& [name, r] : report.rates) {
    const double q = r.rate(), se = r.standardError();
    rates[name] = {{"rate", q}, {"se", se},          {"lo", std::max(0.0, q - 1.96 * se)},
                   {"hi", std::min(1.0, q + 1.96 * se)}, {"hits", r.hits}, {"total", r.total}};
  }
  json values = json::object();
  for (const auto& [name, v] : report.values) values[name] = std::isfinite(v) ? json(v) : json(nullptr);
  return {{"experiment", report.experiment},
          {"config", report.config},
          {"seed", report.seed},
          {"replications", report.requested},
          {"used", report.used},
          {"excluded", report.excluded},
          {"failed", report.failed},
          {"rates", rates},
          {"values", values}};
}

std::string recordsCsv(const SimReport& report) {
  std::ostringstream os;
  for (size_t k = 0; k < report.columns.size(); ++k) os << (k ? "," : "") << report.columns[k];
  os << '\n';
  char buf[32];
  for (const auto& row : report.records) {
    for (size_t k = 0; k < row.size(); ++k) {
      if (k) os << ',';
      if (std::isfinite(row[k])) {
        std::snprintf(buf, sizeof buf, "%.17g", row[k]);
        os << buf;
      }
    }
    os << '\n';
  }
  return os.str();
}

// --- coverage ----------------------------------------------------------------------

SimReport runCoverage(const CoverageConfig& cfg, Execution exec) {
  checkCommon(cfg.n, cfg.p, cfg.sigma, cfg.cutoff, cfg.alpha);
  if (cfg.reps < 100) throw ValidationError("coverage needs at least 100 replications");
  if (cfg.target < 0 || cfg.target >= cfg.p) throw ValidationError("target coefficient out of range");

  MeanShiftSpec spec;
  spec.X = generateDesign(cfg.n, cfg.p, childSeed(cfg.seed, ~std::uint64_t{0}));
  spec.beta = Vector::Ones(cfg.p);
  spec.beta(1) = 2.0;
  spec.u = plantedShift(cfg.n, cfg.outlierCount, cfg.s);
  spec.sigma = cfg.sigma;
  const Vector mu = spec.mean();
  const IndexSet trueIn = spec.trueInliers();

  SimReport report;
  report.experiment = "coverage";
  report.seed = cfg.seed;
  report.requested = cfg.reps;
  report.config = {{"n", cfg.n}, {"p", cfg.p}, {"s", cfg.s}, {"outliers", cfg.outlierCount},
                   {"cutoff", cfg.cutoff}, {"sigma", cfg.sigma}, {"alpha", cfg.alpha},
                   {"target", cfg.target}, {"reps", cfg.reps}};
  report.columns = {"rep",          "status",        "m",           "betaM",
                    "betaStar",     "sigmaEst",      "naiveLo",     "naiveHi",
                    "estLo",        "estHi",         "knownLo",     "knownHi",
                    "naiveCoversM", "estCoversM",    "knownCoversM", "naiveCoversStar",
                    "estCoversStar", "knownCoversStar", "allOutliersFound"};

  std::vector<Replication> reps(static_cast<size_t>(cfg.reps));
  forEachReplication(cfg.reps, exec, [&](int r) {
    auto& out = reps[static_cast<size_t>(r)];
    out.record.assign(report.columns.size(), kNaN);
    out.record[0] = r;
    try {
      const Dataset data = generateMeanShift(spec, childSeed(cfg.seed, static_cast<std::uint64_t>(r)));
      const DetectionResult det = detectCooks(data, cfg.cutoff, Execution::Serial);
      out.record[2] = static_cast<double>(det.inliers.size());
      if (static_cast<Index>(det.inliers.size()) <= cfg.p) {
        out.outcome = Outcome::Excluded;
        out.record[1] = 1;
        return;
      }
      const OlsFit fit = fitOls(data, det.inliers);
      const double betaM = projectedTarget(spec.X, mu, det.inliers)(cfg.target);
      const double betaStar = spec.beta(cfg.target);
      const NaiveResult naive = naiveCoefficient(fit, cfg.target, cfg.alpha);
      const double sigmaEst = estimateSigmaAugLasso(data).sigma;
      const ContrastSpec est = coefficientContrast(fit, cfg.target, data, sigmaEst);
      const Interval estCi =
          selectiveInterval(est, zTruncationSet(est, det.event, Execution::Serial), cfg.alpha);
      const ContrastSpec known = coefficientContrast(fit, cfg.target, data, cfg.sigma);
      const Interval knownCi =
          selectiveInterval(known, zTruncationSet(known, det.event, Execution::Serial), cfg.alpha);
      const bool found = std::includes(trueIn.begin(), trueIn.end(), det.inliers.begin(),
                                       det.inliers.end());
      out.record = {static_cast<double>(r), 0.0, static_cast<double>(det.inliers.size()),
                    betaM, betaStar, sigmaEst, naive.ci.lo, naive.ci.hi, estCi.lo, estCi.hi,
                    knownCi.lo, knownCi.hi,
                    flag(covers(naive.ci, betaM)), flag(covers(estCi, betaM)),
                    flag(covers(knownCi, betaM)), flag(covers(naive.ci, betaStar)),
                    flag(covers(estCi, betaStar)), flag(covers(knownCi, betaStar)), flag(found)};
      out.outcome = Outcome::Used;
    } catch (const std::exception&) {
      out.outcome = Outcome::Failed;
      out.record[1] = 2;
    }
  });

  collect(report, reps);
  const char* rateNames[] = {"naive_cover_betaM",    "est_cover_betaM",    "known_cover_betaM",
                             "naive_cover_betaStar", "est_cover_betaStar", "known_cover_betaStar",
                             "all_outliers_found"};
  for (size_t k = 0; k < 7; ++k) report.rates.emplace_back(rateNames[k], tally(reps, 12 + k));
  report.values.emplace_back("mean_sigma_est", meanOf(reps, 5));
  double naiveLen = 0.0, estLen = 0.0;
  Index used = 0;
  for (const auto& rep : reps) {
    if (rep.outcome != Outcome::Used) continue;
    naiveLen += rep.record[7] - rep.record[6];
    estLen += rep.record[9] - rep.record[8];
    ++used;
  }
  report.values.emplace_back("mean_naive_length", used ? naiveLen / used : kNaN);
  report.values.emplace_back("mean_est_length", used ? estLen / used : kNaN);
  return report;
}

// --- power -----------------------------------------------------------------------

SimReport runPower(const PowerConfig& cfg, Execution exec) {
  checkCommon(cfg.n, cfg.p, cfg.sigma, cfg.cutoff, cfg.alpha);
  if (cfg.reps < 1) throw ValidationError("power needs at least one replication");
  if (cfg.beta1Values.empty()) throw ValidationError("power needs at least one beta_1 value");

  const Matrix X = generateDesign(cfg.n, cfg.p, childSeed(cfg.seed, ~std::uint64_t{0}));
  IndexSet group;
  if (cfg.group) {
    for (Index j = 1; j < cfg.p; ++j) group.push_back(j);
  } else {
    group = {1};
  }

  SimReport report;
  report.experiment = cfg.group ? "power-group" : "power";
  report.seed = cfg.seed;
  report.requested = cfg.reps * static_cast<Index>(cfg.beta1Values.size());
  report.config = {{"n", cfg.n}, {"p", cfg.p}, {"s", cfg.s}, {"outliers", cfg.outlierCount},
                   {"cutoff", cfg.cutoff}, {"sigma", cfg.sigma}, {"alpha", cfg.alpha},
                   {"beta1", cfg.beta1Values}, {"group", cfg.group}, {"reps", cfg.reps}};
  report.columns = {"beta1", "rep", "status", "m", "sigmaEst", "pNaive", "pEst", "pExact",
                    "rejectNaive", "rejectEst", "rejectExact"};

  for (size_t v = 0; v < cfg.beta1Values.size(); ++v) {
    MeanShiftSpec spec;
    spec.X = X;
    spec.beta = Vector::Ones(cfg.p);
    if (cfg.group) spec.beta.tail(cfg.p - 2).setZero();
    spec.beta(1) = cfg.beta1Values[v];
    spec.u = plantedShift(cfg.n, cfg.outlierCount, cfg.s);
    spec.sigma = cfg.sigma;

    std::vector<Replication> reps(static_cast<size_t>(cfg.reps));
    forEachReplication(cfg.reps, exec, [&](int r) {
      auto& out = reps[static_cast<size_t>(r)];
      out.record.assign(report.columns.size(), kNaN);
      out.record[0] = cfg.beta1Values[v];
      out.record[1] = r;
      try {
        // Common random numbers across the beta_1 sweep.
        const Dataset data =
            generateMeanShift(spec, childSeed(cfg.seed, static_cast<std::uint64_t>(r)));
        const DetectionResult det = detectCooks(data, cfg.cutoff, Execution::Serial);
        out.record[3] = static_cast<double>(det.inliers.size());
        if (static_cast<Index>(det.inliers.size()) <= cfg.p) {
          out.outcome = Outcome::Excluded;
          out.record[2] = 1;
          return;
        }
        const OlsFit fit = fitOls(data, det.inliers);
        const double sigmaEst = estimateSigmaAugLasso(data).sigma;
        double pNaive, pEst, pExact;
        const FTestResult exact = selectiveFTest(data, fit, group, det.event, Execution::Serial);
        if (cfg.group) {
          pNaive = exact.naivePValue;
          pEst = groupChi2Test(data, fit, group, det.event, sigmaEst, Execution::Serial).pValue;
          pExact = exact.pValue;
        } else {
          pNaive = naiveCoefficient(fit, 1, cfg.alpha).pValue;
          const ContrastSpec c = coefficientContrast(fit, 1, data, sigmaEst);
          const IntervalSet E = zTruncationSet(c, det.event, Execution::Serial);
          const auto null = TruncatedDistribution::normal(0.0, E);
          pEst = std::min(1.0, 2.0 * std::min(null.sf(c.z), null.cdf(c.z)));
          pExact = std::min(1.0, 2.0 * std::min(exact.pValue, 1.0 - exact.pValue));
        }
        out.record = {cfg.beta1Values[v], static_cast<double>(r), 0.0,
                      static_cast<double>(det.inliers.size()), sigmaEst, pNaive, pEst, pExact,
                      flag(pNaive < cfg.alpha), flag(pEst < cfg.alpha), flag(pExact < cfg.alpha)};
        out.outcome = Outcome::Used;
      } catch (const std::exception&) {
        out.outcome = Outcome::Failed;
        out.record[2] = 2;
      }
    });

    collect(report, reps);
    const std::string suffix = "@" + formatNumber(cfg.beta1Values[v]);
    report.rates.emplace_back("reject_naive" + suffix, tally(reps, 8));
    report.rates.emplace_back("reject_est" + suffix, tally(reps, 9));
    report.rates.emplace_back("reject_exact" + suffix, tally(reps, 10));
  }
  return report;
}

// --- conditional uniformity -------------------------------------------------------

SimReport runUniformity(const UniformityConfig& cfg, Execution exec) {
  checkCommon(cfg.n, cfg.p, cfg.sigma, cfg.cutoff, 0.05);
  if (cfg.accepted < 1) throw ValidationError("uniformity needs at least one accepted draw");
  if (cfg.target < 0 || cfg.target >= cfg.p) throw ValidationError("target coefficient out of range");

  MeanShiftSpec spec;
  spec.X = generateDesign(cfg.n, cfg.p, childSeed(cfg.seed, ~std::uint64_t{0}));
  spec.beta = Vector::Ones(cfg.p);
  spec.beta(cfg.target) = 0.0;
  spec.u = plantedShift(cfg.n, cfg.outlierCount, cfg.s);
  spec.sigma = cfg.sigma;
  const IndexSet planted = complementOf(spec.trueInliers(), cfg.n);
  const Vector mu = spec.mean();

  // Cook's distances only need the residual on the fixed design.
  const Matrix Q = orthonormalBasis(spec.X);
  const Vector lev = Q.rowwise().squaredNorm();
  const double nn = static_cast<double>(cfg.n), pp = static_cast<double>(cfg.p);
  const double threshold = cfg.cutoff / nn;
  auto selectsM = [&](const Vector& y) {
    const Vector r = y - Q * (Q.transpose() * y);
    const double s2 = r.squaredNorm() / (nn - pp);
    size_t k = 0;
    for (Index i = 0; i < cfg.n; ++i) {
      const double h = lev(i);
      const bool out = r(i) * r(i) * h / (pp * s2 * (1 - h) * (1 - h)) >= threshold;
      if (out) {
        if (k >= planted.size() || planted[k] != i) return false;
        ++k;
      }
    }
    return k == planted.size();
  };

  SimReport report;
  report.experiment = "uniformity";
  report.seed = cfg.seed;
  report.requested = cfg.accepted;
  report.config = {{"n", cfg.n}, {"p", cfg.p}, {"cutoff", cfg.cutoff}, {"sigma", cfg.sigma},
                   {"target", cfg.target}, {"outliers", cfg.outlierCount}, {"s", cfg.s},
                   {"accepted", cfg.accepted}};
  report.columns = {"draw", "status", "attempts", "pZ", "pF", "pNaive"};

  std::vector<Replication> reps(static_cast<size_t>(cfg.accepted));
  forEachReplication(cfg.accepted, exec, [&](int r) {
    auto& out = reps[static_cast<size_t>(r)];
    out.record.assign(report.columns.size(), kNaN);
    out.record[0] = r;
    try {
      std::mt19937_64 rng(childSeed(cfg.seed, static_cast<std::uint64_t>(r)));
      std::normal_distribution<double> normal;
      Vector y(cfg.n);
      int attempts = 0;
      bool accepted = false;
      while (!accepted && attempts < cfg.maxAttemptsPerDraw) {
        ++attempts;
        for (Index i = 0; i < cfg.n; ++i) y(i) = mu(i) + cfg.sigma * normal(rng);
        accepted = selectsM(y);
      }
      out.record[2] = attempts;
      if (!accepted) {
        out.outcome = Outcome::Failed;
        out.record[1] = 3;
        return;
      }
      const Dataset data = makeDataset(y, spec.X, {}, true);
      const DetectionResult det = detectCooks(data, cfg.cutoff, Execution::Serial);
      if (det.outliers != planted) throw NumericalError("fast Cook's screen disagrees with detection");
      const OlsFit fit = fitOls(data, det.inliers);
      const ContrastSpec c = coefficientContrast(fit, cfg.target, data, cfg.sigma);
      const IntervalSet E = zTruncationSet(c, det.event, Execution::Serial);
      const double pZ = TruncatedDistribution::normal(0.0, E).sf(c.z);
      const double pF = selectiveFTest(data, fit, {cfg.target}, det.event, Execution::Serial).pValue;
      const double pNaive = naiveCoefficient(fit, cfg.target, 0.05).pValue;
      out.record = {static_cast<double>(r), 0.0, static_cast<double>(attempts), pZ, pF, pNaive};
      out.outcome = Outcome::Used;
    } catch (const std::exception&) {
      out.outcome = Outcome::Failed;
      out.record[1] = 2;
    }
  });

  collect(report, reps);
  double attempts = 0.0;
  std::vector<double> pz, pf, pn;
  for (const auto& rep : reps) {
    if (std::isfinite(rep.record[2])) attempts += rep.record[2];
    if (rep.outcome != Outcome::Used) continue;
    pz.push_back(rep.record[3]);
    pf.push_back(rep.record[4]);
    pn.push_back(rep.record[5]);
  }
  const double acceptance = attempts > 0 ? static_cast<double>(report.used) / attempts : 0.0;
  report.values.emplace_back("acceptance_rate", acceptance);
  if (acceptance < 1e-3) {
    std::ostringstream msg;
    msg << "conditional sampling impractical: acceptance rate " << acceptance << " < 1e-3";
    throw NumericalError(msg.str());
  }
  const std::pair<const char*, const std::vector<double>*> tests[] = {
      {"z", &pz}, {"f", &pf}, {"naive", &pn}};
  for (const auto& [name, vals] : tests) {
    const KsResult ks = vals->empty() ? KsResult{kNaN, kNaN} : ksUniform(*vals);
    report.values.emplace_back(std::string("ks_stat_") + name, ks.statistic);
    report.values.emplace_back(std::string("ks_p_") + name, ks.pValue);
  }
  return report;
}

}  // namespace outsel
