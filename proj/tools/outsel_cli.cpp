// outsel: selective inference after outlier removal.
//
//   outsel fit --data FILE --response NAME [--detect cooks|dffits|softipod] [--cutoff X]
//              [--sigma exact|est|VALUE] [--alpha A] [--ci] [--format table|json]
//   outsel simulate coverage|power|uniformity [--n N] [--p P] [--s S] [--cutoff X]
//              [--reps R] [--seed K] [--threads T] [--out PREFIX]
//
// Exit codes: 0 success, 2 invalid input or flags, 3 numerical failure.

#include "outsel/csv.hpp"
#include "outsel/detection.hpp"
#include "outsel/inference.hpp"
#include "outsel/report.hpp"
#include "outsel/sigma_estimation.hpp"
#include "outsel/simulation.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace outsel;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct FitArgs {
  std::string data, response, detect = "cooks", sigma = "exact", format = "table";
  std::optional<double> cutoff;
  double alpha = 0.05;
  bool noIntercept = false, ci = false;
};

struct SimArgs {
  std::string experiment;
  std::optional<Index> n, p;
  std::optional<double> s, cutoff;
  std::optional<int> reps;
  std::optional<Index> outliers;
  double sigma = 1.0, alpha = 0.05;
  std::vector<double> beta1;
  bool group = false;
  std::uint64_t seed = 1;
  std::string out;
};

std::string runFit(const FitArgs& a) {
  const Dataset data = validateDataset(readCsvFile(a.data), a.response, !a.noIntercept);

  DetectionConfig det;
  det.method = parseDetectionMethod(a.detect);
  if (a.cutoff) {
    det.cutoff = *a.cutoff;
  } else if (det.method == DetectionMethod::Dffits) {
    det.cutoff = defaultDffitsThreshold(data.n(), data.p());
  } else if (det.method == DetectionMethod::SoftIpod) {
    throw ValidationError("--cutoff (the lasso penalty) is required for softipod");
  }

  InferenceOptions opt;
  opt.alpha = a.alpha;
  opt.intervals = a.ci;
  if (a.sigma == "exact") {
    opt.sigmaMode = SigmaMode::Exact;
    if (a.ci) throw ValidationError("--ci needs a sigma value or --sigma est (exact mode has no intervals)");
  } else if (a.sigma == "est") {
    opt.sigmaMode = SigmaMode::Estimated;
    opt.sigma = estimateSigmaAugLasso(data).sigma;
  } else {
    opt.sigmaMode = SigmaMode::Known;
    size_t used = 0;
    try {
      opt.sigma = std::stod(a.sigma, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.sigma.size() || !(opt.sigma > 0.0)) {
      throw ValidationError("--sigma must be 'exact', 'est' or a positive number");
    }
  }

  const DetectionResult detection = detect(data, det);
  const InferenceReport report = buildReport(data, detection, opt);
  if (a.format == "json") return reportToJson(report).dump(2) + "\n";
  return formatReportTable(report);
}

void writeFile(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
}

std::string runSimulate(const SimArgs& a) {
  SimReport report;
  if (a.experiment == "coverage") {
    CoverageConfig c;
    c.n = a.n.value_or(c.n);
    c.p = a.p.value_or(c.p);
    c.s = a.s.value_or(c.s);
    c.cutoff = a.cutoff.value_or(c.cutoff);
    c.reps = a.reps.value_or(c.reps);
    c.outlierCount = a.outliers.value_or(c.outlierCount);
    c.sigma = a.sigma;
    c.alpha = a.alpha;
    c.seed = a.seed;
    report = runCoverage(c);
  } else if (a.experiment == "power") {
    PowerConfig c;
    c.n = a.n.value_or(c.n);
    c.p = a.p.value_or(c.p);
    c.s = a.s.value_or(c.s);
    c.cutoff = a.cutoff.value_or(c.cutoff);
    c.reps = a.reps.value_or(c.reps);
    c.outlierCount = a.outliers.value_or(c.outlierCount);
    c.sigma = a.sigma;
    c.alpha = a.alpha;
    c.seed = a.seed;
    c.group = a.group;
    if (!a.beta1.empty()) c.beta1Values = a.beta1;
    report = runPower(c);
  } else if (a.experiment == "uniformity") {
    UniformityConfig c;
    c.n = a.n.value_or(c.n);
    c.p = a.p.value_or(c.p);
    c.s = a.s.value_or(c.s);
    c.cutoff = a.cutoff.value_or(c.cutoff);
    c.accepted = a.reps.value_or(c.accepted);
    c.outlierCount = a.outliers.value_or(c.outlierCount);
    c.sigma = a.sigma;
    c.seed = a.seed;
    report = runUniformity(c);
  } else {
    throw ValidationError("unknown experiment '" + a.experiment + "'");
  }

  const std::string json = toJson(report).dump(2) + "\n";
  if (a.out.empty()) return json;
  writeFile(a.out + ".json", json);
  writeFile(a.out + ".csv", recordsCsv(report));
  return "wrote " + a.out + ".json and " + a.out + ".csv\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective inference for linear regression after outlier removal"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  FitArgs fit;
  auto* fitCmd = app.add_subcommand("fit", "detect outliers, refit, and report naive and selective inference");
  fitCmd->add_option("--data", fit.data, "CSV file with a header row")->required();
  fitCmd->add_option("--response", fit.response, "response column name")->required();
  fitCmd->add_option("--detect", fit.detect, "cooks | dffits | softipod")
      ->check(CLI::IsMember({"cooks", "dffits", "softipod"}));
  fitCmd->add_option("--cutoff", fit.cutoff, "detection cutoff (lambda)");
  fitCmd->add_option("--sigma", fit.sigma, "exact | est | known noise level");
  fitCmd->add_option("--alpha", fit.alpha, "interval level")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  fitCmd->add_option("--format", fit.format, "table | json")->check(CLI::IsMember({"table", "json"}));
  fitCmd->add_flag("--no-intercept", fit.noIntercept, "do not prepend an intercept column");
  fitCmd->add_flag("--ci", fit.ci, "report selective confidence intervals (needs a sigma)");

  SimArgs sim;
  auto* simCmd = app.add_subcommand("simulate", "Monte-Carlo coverage, power and uniformity studies");
  simCmd->add_option("experiment", sim.experiment, "coverage | power | uniformity")
      ->required()
      ->check(CLI::IsMember({"coverage", "power", "uniformity"}));
  simCmd->add_option("--n", sim.n, "observations");
  simCmd->add_option("--p", sim.p, "columns including the intercept");
  simCmd->add_option("--s", sim.s, "outlier shift size");
  simCmd->add_option("--outliers", sim.outliers, "number of planted outliers");
  simCmd->add_option("--cutoff", sim.cutoff, "Cook's distance cutoff");
  simCmd->add_option("--reps", sim.reps, "replications (accepted draws for uniformity)");
  simCmd->add_option("--sigma", sim.sigma, "noise level");
  simCmd->add_option("--alpha", sim.alpha, "test / interval level");
  simCmd->add_option("--beta1", sim.beta1, "beta_1 values swept by the power study");
  simCmd->add_flag("--group", sim.group, "power study of the group null beta_{1..p-1} = 0");
  simCmd->add_option("--seed", sim.seed, "master seed");
  simCmd->add_option("--out", sim.out, "write PREFIX.json and PREFIX.csv instead of printing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  if (threads > 0) omp_set_num_threads(threads);
  try {
    const std::string out = fitCmd->parsed() ? runFit(fit) : runSimulate(sim);
    std::cout << out;
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
