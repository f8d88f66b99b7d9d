#include "outsel/csv.hpp"
#include "outsel/detection.hpp"
#include "outsel/inference.hpp"
#include "outsel/report.hpp"

#include <doctest.h>

using namespace outsel;

namespace {

InferenceReport stacklossReport(SigmaMode mode) {
  const Dataset d = validateDataset(readCsvFile(OUTSEL_FIXTURES "/stackloss.csv"), "stack.loss", true);
  InferenceOptions opt;
  opt.sigmaMode = mode;
  opt.sigma = 3.0;
  return buildReport(d, detect(d, {DetectionMethod::Cooks, 4.0}), opt);
}

}  // namespace

TEST_CASE("interval sets round-trip through json") {
  const IntervalSet sets[] = {IntervalSet::empty(), IntervalSet::real(),
                              IntervalSet({{-kInf, -1.5}, {0.25, 3.0}, {7.0, kInf}})};
  for (const auto& s : sets) {
    const auto j = intervalSetToJson(s);
    CHECK(intervalSetFromJson(nlohmann::json::parse(j.dump())) == s);
  }
  CHECK(intervalSetToJson(IntervalSet::nonNegative()).dump() == "[[0.0,null]]");
  CHECK_THROWS_AS(intervalSetFromJson(nlohmann::json::parse("[[1]]")), ValidationError);
}

TEST_CASE("json schema") {
  const auto j = reportToJson(stacklossReport(SigmaMode::Exact));
  CHECK(j["detection"]["method"] == "cooks");
  CHECK(j["detection"]["outliers"] == nlohmann::json::array({21}));
  CHECK(j["fit"]["coefficients"].size() == 4);
  for (const auto& c : j["fit"]["coefficients"]) {
    for (const char* key : {"name", "estimate", "naiveP", "selectiveP", "ciLo", "ciHi", "truncationSet"}) {
      CHECK(c.contains(key));
    }
    CHECK(c["ciLo"].is_null());
  }
  const auto known = reportToJson(stacklossReport(SigmaMode::Known));
  CHECK(known["fit"]["coefficients"][1]["ciLo"].is_number());
}

TEST_CASE("table values are the json values printed with %.6g") {
  const auto rep = stacklossReport(SigmaMode::Known);
  const auto j = reportToJson(rep);
  const std::string table = formatReportTable(rep);
  CHECK(table.find(formatNumber(j["fit"]["adjR2"].get<double>())) != std::string::npos);
  for (const auto& c : j["fit"]["coefficients"]) {
    for (const char* key : {"estimate", "naiveP", "selectiveP", "ciLo", "ciHi"}) {
      CHECK(table.find(formatNumber(c[key].get<double>())) != std::string::npos);
    }
  }
  CHECK(formatNumber(0.00402645123) == "0.00402645");
  CHECK(formatNumber(1.30902e-06) == "1.30902e-06");
}
