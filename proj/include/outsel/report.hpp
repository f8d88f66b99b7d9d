#pragma once

#include "outsel/inference.hpp"
#include "outsel/interval_set.hpp"

#include <json.hpp>

#include <string>

namespace outsel {

/// [[lo, hi], ...] with null for infinite endpoints.
nlohmann::json intervalSetToJson(const IntervalSet& set);
IntervalSet intervalSetFromJson(const nlohmann::json& j);

/// {detection:{method,cutoff,outliers[]}, fit:{adjR2,coefficients[...]}} plus
/// a few descriptive fields (method tag, sigma, n, |M|, p).
nlohmann::json reportToJson(const InferenceReport& report);

/// Human-readable table; every number is the JSON value printed with %.6g.
std::string formatReportTable(const InferenceReport& report);

/// %.6g formatting shared by the table and its tests.
std::string formatNumber(double x);

}  // namespace outsel
