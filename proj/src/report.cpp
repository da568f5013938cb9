#include "bellsim/report.hpp"

#include <cstdio>
#include <ostream>

#include "bellsim/classical_analytic.hpp"
#include "json.hpp"

namespace bellsim {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kValueColumns = {
    "p",    "p_prime",   "p_double_prime",     "p_stderr", "p_prime_stderr", "p_double_prime_stderr",
    "chsh", "violation", "marginal_aggregate", "regime",   "physical",       "diagnostics"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// One row as (column, json value) pairs; null marks an absent field.
ordered_json row_object(const ScenarioConfig& config, const ReportRow& row) {
  ordered_json o;
  o["row"] = row.index;
  for (std::size_t a = 0; a < config.sweep.size(); ++a) {
    o[config.sweep[a].parameter] = a < row.sweep_values.size() ? ordered_json(row.sweep_values[a]) : nullptr;
  }
  if (row.triple) {
    o["p"] = row.triple->p;
    o["p_prime"] = row.triple->p_prime;
    o["p_double_prime"] = row.triple->p_double_prime;
  } else {
    o["p"] = o["p_prime"] = o["p_double_prime"] = nullptr;
  }
  if (row.std_errors) {
    o["p_stderr"] = (*row.std_errors)[0];
    o["p_prime_stderr"] = (*row.std_errors)[1];
    o["p_double_prime_stderr"] = (*row.std_errors)[2];
  } else {
    o["p_stderr"] = o["p_prime_stderr"] = o["p_double_prime_stderr"] = nullptr;
  }
  o["chsh"] = row.chsh;
  o["violation"] = std::string(to_string(row.violation));
  o["marginal_aggregate"] = row.marginal_aggregate;
  o["regime"] = std::string(to_string(row.regime));
  o["physical"] = row.physical ? ordered_json(*row.physical) : ordered_json(nullptr);
  o["diagnostics"] = row.diagnostics;
  return o;
}

std::string csv_value(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  return csv_field(v.get<std::string>());
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> report_columns(const ScenarioConfig& config) {
  std::vector<std::string> cols{"row"};
  for (const auto& a : config.sweep) cols.push_back(a.parameter);
  cols.insert(cols.end(), kValueColumns.begin(), kValueColumns.end());
  return cols;
}

void write_csv(std::ostream& out, const ScenarioConfig& config, const std::vector<ReportRow>& rows) {
  const auto cols = report_columns(config);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_field(cols[i]);
  out << '\n';
  for (const auto& row : rows) {
    const ordered_json o = row_object(config, row);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_value(o.at(cols[i]));
    out << '\n';
  }
}

void write_json(std::ostream& out, const ScenarioConfig& config, const std::vector<ReportRow>& rows) {
  ordered_json doc;
  doc["schema_version"] = config.schema_version;
  doc["engine"] = std::string(to_string(config.engine));
  doc["columns"] = report_columns(config);
  doc["rows"] = ordered_json::array();
  for (const auto& row : rows) doc["rows"].push_back(row_object(config, row));
  out << doc.dump(2) << '\n';
}

void write_vessels_report(std::ostream& out) {
  const SettingTable table = vessels_scenario();
  const ChshReport r = analyze(table);
  out << "Connected vessels\n";
  out << "setting  p11  p12  p21  p22  E\n";
  for (auto s : kAllSettings) {
    const auto& d = table[index_of(s)];
    out << to_string(s) << "  " << d.p11 << "  " << d.p12 << "  " << d.p21 << "  " << d.p22 << "  "
        << expectation(d) << '\n';
  }
  out << "CHSH (" << to_string(r.sign_convention) << ") = " << format_double(r.chsh_value)
      << (r.violates_chsh ? "  violated\n" : "  not violated\n");
  out << "max |CHSH| over sign conventions = " << format_double(max_abs_chsh(r.expectations)) << '\n';
  out << "marginal residuals:";
  for (double x : r.marginal_residuals) out << ' ' << format_double(x);
  out << '\n';
  out << "marginal aggregate = " << format_double(r.signaling_aggregate)
      << (r.violates_marginals ? "  marginal laws violated\n" : "  marginal laws hold\n");
}

}  // namespace bellsim
