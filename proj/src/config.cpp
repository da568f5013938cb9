#include "bellsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "bellsim/errors.hpp"
#include "json.hpp"

namespace bellsim {

using nlohmann::json;

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::ClassicalAnalytic:
      return "classical-analytic";
    case Engine::ClassicalMc:
      return "classical-mc";
    case Engine::QuantumSemiclassical:
      return "quantum-semiclassical";
    case Engine::QuantumNumeric:
      return "quantum-numeric";
    case Engine::Vessels:
      return "vessels";
  }
  return "?";
}

namespace {

constexpr std::int64_t kRationalScale = 1'000'000;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("expected an object", path.empty() ? "<root>" : path);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  require_object(j, path);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key", join(path, key));
  }
}

double get_number(const json& j, const std::string& path, const std::string& key, std::optional<double> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required number", join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("expected a number", join(path, key));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("expected a finite number", join(path, key));
  return x;
}

std::uint64_t get_unsigned(const json& j, const std::string& path, const std::string& key,
                           std::optional<std::uint64_t> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required integer", join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError("expected a non-negative integer", join(path, key));
  }
  return v.get<std::uint64_t>();
}

int get_int(const json& j, const std::string& path, const std::string& key, std::optional<int> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required integer", join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("expected an integer", join(path, key));
  return v.get<int>();
}

std::string get_string(const json& j, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required string", join(path, key));
  }
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError("expected a string", join(path, key));
  return v.get<std::string>();
}

Rational to_rational(double x) {
  return Rational{static_cast<std::int64_t>(std::llround(x * static_cast<double>(kRationalScale))), kRationalScale};
}

Engine parse_engine(const std::string& name) {
  static const std::map<std::string, Engine> engines{
      {"classical-analytic", Engine::ClassicalAnalytic},
      {"classical-mc", Engine::ClassicalMc},
      {"quantum-semiclassical", Engine::QuantumSemiclassical},
      {"quantum-numeric", Engine::QuantumNumeric},
      {"vessels", Engine::Vessels},
  };
  const auto it = engines.find(name);
  if (it == engines.end()) throw ConfigError("unknown engine '" + name + "'", "engine");
  return it->second;
}

ClassicalParams parse_classical(const json& j) {
  const std::string path = "classical";
  check_keys(j, path, {"R", "R_prime"});
  return ClassicalParams{get_number(j, path, "R", std::nullopt), get_number(j, path, "R_prime", std::nullopt)};
}

TimingParams parse_timing(const json& j) {
  const std::string path = "timing";
  check_keys(j, path, {"distance", "speed", "n", "window", "short_length", "start", "end"});
  TimingParams t;
  t.distance = get_number(j, path, "distance", 1.0);
  t.speed = get_number(j, path, "speed", 1.0);
  t.bounce_count = get_int(j, path, "n", 1);
  const std::string window = get_string(j, path, "window", "long");
  if (window == "long") {
    t.window = WindowMode::Long;
  } else if (window == "short") {
    t.window = WindowMode::Short;
  } else if (window == "custom") {
    t.window = WindowMode::Custom;
  } else {
    throw ConfigError("expected long, short or custom", "timing.window");
  }
  if (t.window != WindowMode::Short && j.contains("short_length")) {
    throw ConfigError("only valid with window = short", "timing.short_length");
  }
  if (t.window != WindowMode::Custom && (j.contains("start") || j.contains("end"))) {
    throw ConfigError("only valid with window = custom", j.contains("start") ? "timing.start" : "timing.end");
  }
  t.short_length = get_number(j, path, "short_length", 0.5);
  if (t.window == WindowMode::Custom) {
    t.start = get_number(j, path, "start", std::nullopt);
    t.end = get_number(j, path, "end", std::nullopt);
  }
  return t;
}

McParams parse_mc(const json& j) {
  const std::string path = "mc";
  check_keys(j, path, {"trials", "seed"});
  return McParams{get_unsigned(j, path, "trials", std::nullopt), get_unsigned(j, path, "seed", std::nullopt)};
}

void parse_screen(const json& j, const std::string& path, double& modulus, double& phase) {
  check_keys(j, path, {"modulus", "phase"});
  modulus = get_number(j, path, "modulus", std::nullopt);
  phase = get_number(j, path, "phase", 0.0);
}

Emission parse_emission(const json& j, const std::string& path) {
  const std::string e = get_string(j, path, "emission", "mixture");
  if (e == "mixture") return Emission::Mixture;
  if (e == "superposition") return Emission::Superposition;
  throw ConfigError("expected mixture or superposition", join(path, "emission"));
}

SemiclassicalParams parse_semiclassical(const json& j) {
  const std::string path = "semiclassical";
  check_keys(j, path, {"standard", "efficient", "emission"});
  SemiclassicalParams s;
  if (!j.contains("standard")) throw ConfigError("missing screen block", "semiclassical.standard");
  if (!j.contains("efficient")) throw ConfigError("missing screen block", "semiclassical.efficient");
  parse_screen(j.at("standard"), "semiclassical.standard", s.standard_modulus, s.standard_phase);
  parse_screen(j.at("efficient"), "semiclassical.efficient", s.efficient_modulus, s.efficient_phase);
  s.emission = parse_emission(j, path);
  return s;
}

NumericParams parse_numeric(const json& j) {
  const std::string path = "numeric";
  check_keys(j, path, {"lambda_standard", "lambda_efficient", "calibrate", "n", "grid", "packet"});
  NumericParams p;
  if (j.contains("lambda_standard")) p.lambda_standard = get_number(j, path, "lambda_standard", std::nullopt);
  if (j.contains("lambda_efficient")) p.lambda_efficient = get_number(j, path, "lambda_efficient", std::nullopt);
  if (j.contains("calibrate")) {
    const json& c = j.at("calibrate");
    const std::string cpath = "numeric.calibrate";
    check_keys(c, cpath, {"detection_standard", "detection_efficient"});
    p.detection_standard = get_number(c, cpath, "detection_standard", std::nullopt);
    p.detection_efficient = get_number(c, cpath, "detection_efficient", std::nullopt);
  }
  p.bounce_count = get_int(j, path, "n", 2);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    const std::string gpath = "numeric.grid";
    check_keys(g, gpath, {"half_length", "points", "dt", "screen_center", "screen_width"});
    p.grid.half_length = get_number(g, gpath, "half_length", p.grid.half_length);
    p.grid.points = get_unsigned(g, gpath, "points", p.grid.points);
    p.grid.dt = get_number(g, gpath, "dt", p.grid.dt);
    p.grid.screen_center = get_number(g, gpath, "screen_center", p.grid.screen_center);
    p.grid.screen_width = get_number(g, gpath, "screen_width", p.grid.screen_width);
  }
  if (j.contains("packet")) {
    const json& k = j.at("packet");
    const std::string kpath = "numeric.packet";
    check_keys(k, kpath, {"center", "width", "wavenumber", "emission"});
    p.packet.center = get_number(k, kpath, "center", p.packet.center);
    p.packet.width = get_number(k, kpath, "width", p.packet.width);
    p.packet.wavenumber = get_number(k, kpath, "wavenumber", p.packet.wavenumber);
    p.packet.kind = parse_emission(k, kpath) == Emission::Mixture ? PacketKind::Mixture : PacketKind::Superposition;
  }
  return p;
}

SweepAxis parse_axis(const json& j, const std::string& path) {
  check_keys(j, path, {"parameter", "min", "max", "points"});
  SweepAxis a;
  a.parameter = get_string(j, path, "parameter", std::nullopt);
  a.min = get_number(j, path, "min", std::nullopt);
  a.max = get_number(j, path, "max", std::nullopt);
  a.points = get_unsigned(j, path, "points", std::nullopt);
  return a;
}

using Setter = std::function<void(ScenarioConfig&, double)>;

const std::map<std::string, std::pair<Engine, Setter>>& setters_for(Engine engine) {
  static const auto build = [](Engine e) {
    std::map<std::string, std::pair<Engine, Setter>> m;
    const auto add = [&](const std::string& name, Setter s) { m.emplace(name, std::make_pair(e, std::move(s))); };
    switch (e) {
      case Engine::ClassicalAnalytic:
      case Engine::ClassicalMc:
        add("classical.R", [](ScenarioConfig& c, double v) { c.classical->reflectivity_standard = v; });
        add("classical.R_prime", [](ScenarioConfig& c, double v) { c.classical->reflectivity_efficient = v; });
        add("timing.n", [](ScenarioConfig& c, double v) {
          if (std::abs(v - std::round(v)) > 1e-9) throw ConfigError("sweep value must be an integer", "timing.n");
          c.timing->bounce_count = static_cast<int>(std::lround(v));
        });
        add("timing.short_length", [](ScenarioConfig& c, double v) { c.timing->short_length = v; });
        break;
      case Engine::QuantumSemiclassical:
        add("semiclassical.standard.modulus", [](ScenarioConfig& c, double v) { c.semiclassical->standard_modulus = v; });
        add("semiclassical.standard.phase", [](ScenarioConfig& c, double v) { c.semiclassical->standard_phase = v; });
        add("semiclassical.efficient.modulus",
            [](ScenarioConfig& c, double v) { c.semiclassical->efficient_modulus = v; });
        add("semiclassical.efficient.phase", [](ScenarioConfig& c, double v) { c.semiclassical->efficient_phase = v; });
        break;
      case Engine::QuantumNumeric:
        add("numeric.lambda_standard", [](ScenarioConfig& c, double v) { c.numeric->lambda_standard = v; });
        add("numeric.lambda_efficient", [](ScenarioConfig& c, double v) { c.numeric->lambda_efficient = v; });
        add("numeric.calibrate.detection_standard",
            [](ScenarioConfig& c, double v) { c.numeric->detection_standard = v; });
        add("numeric.calibrate.detection_efficient",
            [](ScenarioConfig& c, double v) { c.numeric->detection_efficient = v; });
        break;
      case Engine::Vessels:
        break;
    }
    return m;
  };
  static const std::array<std::map<std::string, std::pair<Engine, Setter>>, 5> tables{
      build(Engine::ClassicalAnalytic), build(Engine::ClassicalMc), build(Engine::QuantumSemiclassical),
      build(Engine::QuantumNumeric), build(Engine::Vessels)};
  return tables[static_cast<std::size_t>(engine)];
}

void require_absent(bool present, const char* block, Engine engine) {
  if (present) {
    throw ConfigError("block not used by engine " + std::string(to_string(engine)), block);
  }
}

void require_present(bool present, const char* block, Engine engine) {
  if (!present) {
    throw ConfigError("required by engine " + std::string(to_string(engine)), block);
  }
}

void check_blocks(Engine e, bool classical, bool timing, bool mc, bool semiclassical, bool numeric) {
  const auto need = [e](bool wanted, bool present, const char* block) {
    if (wanted) {
      require_present(present, block, e);
    } else {
      require_absent(present, block, e);
    }
  };
  const bool classical_engine = e == Engine::ClassicalAnalytic || e == Engine::ClassicalMc;
  need(classical_engine, classical, "classical");
  need(classical_engine, timing, "timing");
  need(e == Engine::ClassicalMc, mc, "mc");
  need(e == Engine::QuantumSemiclassical, semiclassical, "semiclassical");
  need(e == Engine::QuantumNumeric, numeric, "numeric");
}

void validate_point(const ScenarioConfig& c) {
  switch (c.engine) {
    case Engine::Vessels:
      break;
    case Engine::ClassicalAnalytic:
    case Engine::ClassicalMc: {
      const auto& cl = *c.classical;
      if (!(cl.reflectivity_standard >= 0.0 && cl.reflectivity_standard <= 1.0)) {
        throw ConfigError("reflectivity outside [0,1]", "classical.R");
      }
      if (!(cl.reflectivity_efficient >= 0.0 && cl.reflectivity_efficient <= 1.0)) {
        throw ConfigError("reflectivity outside [0,1]", "classical.R_prime");
      }
      if (c.engine == Engine::ClassicalAnalytic && c.timing->window == WindowMode::Custom) {
        throw ConfigError("closed forms exist only for long and short windows; use classical-mc", "timing.window");
      }
      c.timing->to_timing();
      if (c.engine == Engine::ClassicalMc && c.mc->trials == 0) throw ConfigError("must be >= 1", "mc.trials");
      break;
    }
    case Engine::QuantumSemiclassical: {
      const auto& s = *c.semiclassical;
      if (!(s.standard_modulus >= 0.0 && s.standard_modulus <= 1.0)) {
        throw ConfigError("modulus outside [0,1]", "semiclassical.standard.modulus");
      }
      if (!(s.efficient_modulus >= 0.0 && s.efficient_modulus <= 1.0)) {
        throw ConfigError("modulus outside [0,1]", "semiclassical.efficient.modulus");
      }
      break;
    }
    case Engine::QuantumNumeric: {
      const auto& n = *c.numeric;
      const bool by_lambda = n.lambda_standard || n.lambda_efficient;
      const bool by_target = n.detection_standard || n.detection_efficient;
      if (by_lambda && by_target) throw ConfigError("give lambdas or calibration targets, not both", "numeric");
      if (by_lambda) {
        if (!n.lambda_standard) throw ConfigError("missing", "numeric.lambda_standard");
        if (!n.lambda_efficient) throw ConfigError("missing", "numeric.lambda_efficient");
        if (*n.lambda_standard < 0.0) throw ConfigError("must be >= 0", "numeric.lambda_standard");
        if (*n.lambda_efficient < 0.0) throw ConfigError("must be >= 0", "numeric.lambda_efficient");
      } else if (by_target) {
        for (const auto& [v, f] : {std::pair{n.detection_standard, "numeric.calibrate.detection_standard"},
                                   std::pair{n.detection_efficient, "numeric.calibrate.detection_efficient"}}) {
          if (!(*v > 0.0 && *v < 1.0)) throw ConfigError("target must be in (0,1)", f);
        }
      } else {
        throw ConfigError("needs lambda_standard/lambda_efficient or a calibrate block", "numeric");
      }
      if (n.bounce_count < 1) throw ConfigError("must be >= 1", "numeric.n");
      validate_resolution(n.grid, n.packet);
      break;
    }
  }
}

}  // namespace

double SweepAxis::value(std::size_t i) const {
  if (points <= 1) return min;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
}

TimingConfig TimingParams::to_timing() const {
  switch (window) {
    case WindowMode::Long:
      return TimingConfig::long_window(distance, speed, bounce_count);
    case WindowMode::Short:
      return TimingConfig::short_window(distance, speed, to_rational(short_length));
    case WindowMode::Custom:
      return TimingConfig::custom(distance, speed, to_rational(start), to_rational(end));
  }
  throw ConfigError("unknown window mode", "timing.window");
}

std::vector<std::string> sweepable_parameters(Engine engine) {
  std::vector<std::string> names;
  for (const auto& [name, _] : setters_for(engine)) names.push_back(name);
  return names;
}

ScenarioConfig with_parameter(const ScenarioConfig& config, const std::string& parameter, double value) {
  const auto& table = setters_for(config.engine);
  const auto it = table.find(parameter);
  if (it == table.end()) {
    throw ConfigError("'" + parameter + "' is not sweepable for engine " + std::string(to_string(config.engine)),
                      "sweep.parameter");
  }
  const bool present = (parameter.starts_with("classical.") && config.classical) ||
                       (parameter.starts_with("timing.") && config.timing) ||
                       (parameter.starts_with("semiclassical.") && config.semiclassical) ||
                       (parameter.starts_with("numeric.") && config.numeric);
  if (!present) throw ConfigError("config has no block for '" + parameter + "'", "sweep.parameter");
  ScenarioConfig out = config;
  it->second.second(out, value);
  return out;
}

void validate(const ScenarioConfig& c) {
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema version " + std::to_string(c.schema_version), "schema_version");
  }
  const Engine e = c.engine;
  check_blocks(e, c.classical.has_value(), c.timing.has_value(), c.mc.has_value(), c.semiclassical.has_value(),
               c.numeric.has_value());
  if (e == Engine::Vessels && !c.sweep.empty()) throw ConfigError("vessels has no parameters to sweep", "sweep");

  std::set<std::string> seen;
  std::size_t total = 1;
  for (std::size_t i = 0; i < c.sweep.size(); ++i) {
    const auto& a = c.sweep[i];
    const std::string field = "sweep[" + std::to_string(i) + "]";
    if (a.points < 1) throw ConfigError("points must be >= 1", field + ".points");
    if (a.max < a.min) throw ConfigError("max < min", field + ".max");
    if (!seen.insert(a.parameter).second) throw ConfigError("axis repeated", field + ".parameter");
    if (!setters_for(e).count(a.parameter)) {
      throw ConfigError("'" + a.parameter + "' is not sweepable for engine " + std::string(to_string(e)),
                        field + ".parameter");
    }
    total *= a.points;
    if (total > 10'000'000) throw ConfigError("sweep exceeds 10^7 points", field + ".points");
  }

  // Every point must be valid before anything runs.
  std::vector<std::size_t> idx(c.sweep.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    ScenarioConfig point = c;
    for (std::size_t a = 0; a < c.sweep.size(); ++a) {
      point = with_parameter(point, c.sweep[a].parameter, c.sweep[a].value(idx[a]));
    }
    validate_point(point);
    for (std::size_t a = c.sweep.size(); a-- > 0;) {
      if (++idx[a] < c.sweep[a].points) break;
      idx[a] = 0;
    }
  }
}

ScenarioConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "<root>");
  }
  check_keys(j, "", {"schema_version", "engine", "classical", "timing", "mc", "semiclassical", "numeric", "sweep"});
  ScenarioConfig c;
  c.schema_version = get_int(j, "", "schema_version", std::nullopt);
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema version " + std::to_string(c.schema_version), "schema_version");
  }
  c.engine = parse_engine(get_string(j, "", "engine", std::nullopt));
  check_blocks(c.engine, j.contains("classical"), j.contains("timing"), j.contains("mc"), j.contains("semiclassical"),
               j.contains("numeric"));
  if (j.contains("classical")) c.classical = parse_classical(j.at("classical"));
  if (j.contains("timing")) c.timing = parse_timing(j.at("timing"));
  if (j.contains("mc")) c.mc = parse_mc(j.at("mc"));
  if (j.contains("semiclassical")) c.semiclassical = parse_semiclassical(j.at("semiclassical"));
  if (j.contains("numeric")) c.numeric = parse_numeric(j.at("numeric"));
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.is_array()) throw ConfigError("expected an array", "sweep");
    for (std::size_t i = 0; i < s.size(); ++i) c.sweep.push_back(parse_axis(s[i], "sweep[" + std::to_string(i) + "]"));
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "--config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bellsim
