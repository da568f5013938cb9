#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bellsim/config.hpp"
#include "bellsim/scenario.hpp"

namespace bellsim {

/// Fixed column order. Sweep axes are inserted after "row", named by parameter.
std::vector<std::string> report_columns(const ScenarioConfig& config);

/// Numbers use 17 significant digits; absent values are empty fields.
void write_csv(std::ostream& out, const ScenarioConfig& config, const std::vector<ReportRow>& rows);

/// JSON mirror of the CSV: {"schema_version", "engine", "columns", "rows": [{column: value}]}.
void write_json(std::ostream& out, const ScenarioConfig& config, const std::vector<ReportRow>& rows);

/// %.17g
std::string format_double(double x);

/// Human-readable report of the connected-vessels scenario.
void write_vessels_report(std::ostream& out);

}  // namespace bellsim
