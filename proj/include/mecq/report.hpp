#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mecq/experiments.hpp"

namespace mecq {

// Shortest round-trip decimal representation of a double.
std::string fmt_double(double v);

nlohmann::json kpi_to_json(const std::string& name, const KpiSummary& kpi);

// "utility,cum_fraction" rows of the empirical CDF.
std::string ecdf_csv(const KpiSummary& kpi);

// Self-contained SVG line rendering of the ECDF, no renderer dependencies.
std::string ecdf_svg(const std::string& title, const KpiSummary& kpi);

// One JSON object per event, newline-delimited.
std::string events_ndjson(const std::vector<EventRecord>& events);

// JSON scenario (de)serialization; the schema mirrors ScenarioConfig.
nlohmann::json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

}  // namespace mecq
