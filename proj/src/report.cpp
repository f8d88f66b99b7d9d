#include "outsel/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace outsel {

using nlohmann::json;

namespace {

json endpoint(double x) { return std::isinf(x) ? json(nullptr) : json(x); }

double endpointFrom(const json& j, double infinity) {
  if (j.is_null()) return infinity;
  if (!j.is_number()) throw ValidationError("interval endpoint must be a number or null");
  return j.get<double>();
}

std::string formatSet(const IntervalSet& set) {
  std::string out;
  for (const auto& piece : set.pieces()) {
    if (!out.empty()) out += " U ";
    out += "[" + (piece.lo == -kInf ? std::string("-inf") : formatNumber(piece.lo)) + ", " +
           (piece.hi == kInf ? std::string("inf") : formatNumber(piece.hi)) + "]";
  }
  return out.empty() ? "{}" : out;
}

}  // namespace

std::string formatNumber(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json intervalSetToJson(const IntervalSet& set) {
  json arr = json::array();
  for (const auto& piece : set.pieces()) arr.push_back({endpoint(piece.lo), endpoint(piece.hi)});
  return arr;
}

IntervalSet intervalSetFromJson(const json& j) {
  if (!j.is_array()) throw ValidationError("interval set must be a JSON array");
  std::vector<Interval> pieces;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw ValidationError("interval must be a [lo, hi] pair");
    pieces.push_back({endpointFrom(pair.at(0), -kInf), endpointFrom(pair.at(1), kInf)});
  }
  return IntervalSet(std::move(pieces));
}

json reportToJson(const InferenceReport& report) {
  json coefs = json::array();
  for (const auto& c : report.coefficients) {
    json entry = {{"name", c.name},
                  {"estimate", c.estimate},
                  {"naiveP", c.naiveP},
                  {"naiveCiLo", c.naiveCi.lo},
                  {"naiveCiHi", c.naiveCi.hi},
                  {"selectiveP", c.selectiveP},
                  {"statistic", c.statistic},
                  {"truncationSet", intervalSetToJson(c.truncation)}};
    entry["ciLo"] = c.selectiveCi ? json(c.selectiveCi->lo) : json(nullptr);
    entry["ciHi"] = c.selectiveCi ? json(c.selectiveCi->hi) : json(nullptr);
    coefs.push_back(std::move(entry));
  }
  json out;
  out["detection"] = {{"method", toString(report.detectionMethod)},
                      {"cutoff", report.cutoff},
                      {"outliers", toOneBased(report.outliers)}};
  out["fit"] = {{"adjR2", report.adjustedR2},
                {"method", report.method},
                {"sigma", report.sigmaMode == SigmaMode::Exact ? json(nullptr) : json(report.sigma)},
                {"alpha", report.alpha},
                {"n", report.n},
                {"m", report.m},
                {"p", report.p},
                {"coefficients", std::move(coefs)}};
  return out;
}

std::string formatReportTable(const InferenceReport& report) {
  std::ostringstream os;
  os << "detection: " << toString(report.detectionMethod)
     << "  cutoff: " << formatNumber(report.cutoff) << "  outliers:";
  const auto labels = toOneBased(report.outliers);
  if (labels.empty()) os << " none";
  for (long i : labels) os << ' ' << i;
  os << "\nmethod: " << report.method;
  if (report.sigmaMode != SigmaMode::Exact) os << "  sigma: " << formatNumber(report.sigma);
  os << "  n: " << report.n << "  |M|: " << report.m << "  p: " << report.p
     << "  adjusted R^2: " << formatNumber(report.adjustedR2) << "\n\n";

  char line[256];
  std::snprintf(line, sizeof line, "%-16s %12s %12s %12s  %-27s %s\n", "coefficient", "estimate",
                "naive p", "selective p", "selective CI", "truncation");
  os << line;
  for (const auto& c : report.coefficients) {
    const std::string ci = c.selectiveCi ? "[" + formatNumber(c.selectiveCi->lo) + ", " +
                                               formatNumber(c.selectiveCi->hi) + "]"
                                         : "-";
    std::snprintf(line, sizeof line, "%-16s %12s %12s %12s  %-27s ", c.name.c_str(),
                  formatNumber(c.estimate).c_str(), formatNumber(c.naiveP).c_str(),
                  formatNumber(c.selectiveP).c_str(), ci.c_str());
    os << line << c.statistic << " in " << formatSet(c.truncation) << "\n";
  }
  return os.str();
}

}  // namespace outsel
