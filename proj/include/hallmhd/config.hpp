#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <type_traits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hallmhd/core.hpp"
#include "hallmhd/initial_data.hpp"
#include "hallmhd/integrator.hpp"

namespace hallmhd {

/// Raised for malformed or invalid configuration text; carries the line when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

struct GridConfig {
  std::size_t n = 0;
  double box_length = 32.0;
  double dealias_fraction = 2.0 / 3.0;
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct TimeConfig {
  double t_end = 0.0;
  double sample_interval = 1.0;
  StepControl control;
  friend bool operator==(const TimeConfig& a, const TimeConfig& b) {
    return a.t_end == b.t_end && a.sample_interval == b.sample_interval &&
           a.control.cfl_advective == b.control.cfl_advective &&
           a.control.cfl_whistler == b.control.cfl_whistler && a.control.dt_min == b.control.dt_min &&
           a.control.dt_max == b.control.dt_max &&
           a.control.blowup_threshold == b.control.blowup_threshold;
  }
};

struct InitConfig {
  InitSpec spec;
  std::optional<double> target_norm;  ///< rescale so ‖u₀‖_{H^m} + ‖B₀‖_{H^m} equals this
  int target_m = 3;
  friend bool operator==(const InitConfig&, const InitConfig&) = default;
};

struct AnalysisConfig {
  int m_max = 3;
  int linf_order = 0;
  double k_const = 1.5;
  double alpha = 0.1;
  std::optional<double> fit_t_a;
  std::optional<double> fit_t_b;
  double min_span_factor = 4.0;
  double decay_mu = 0.75;
  double fit_tolerance = 0.3;
  bool audit_energy = true;
  double energy_tolerance = 1e-4;
  bool audit_fourier = true;
  bool audit_low_frequency = true;
  int low_frequency_j = 1;
  bool audit_splitting = true;
  bool audit_monotonicity = false;
  int monotonicity_m = 3;
  bool audit_lemma23 = false;
  int lemma23_m = 3;
  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  int checkpoint_every = 0;  ///< in samples; 0 writes only the final checkpoint
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  GridConfig grid;
  PhysicsParams physics;
  InitConfig init;
  TimeConfig time;
  AnalysisConfig analysis;
  OutputConfig output;

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.grid == b.grid && a.physics.nu == b.physics.nu &&
           a.physics.mu_resistivity == b.physics.mu_resistivity &&
           a.physics.hall_coefficient == b.physics.hall_coefficient &&
           a.physics.form == b.physics.form && a.physics.nonlinear == b.physics.nonlinear &&
           a.init == b.init && a.time == b.time && a.analysis == b.analysis &&
           a.output == b.output;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Binding {
  std::string key;  ///< section.name
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;  ///< empty when unset
};

inline std::vector<Binding> make_bindings() {
  std::vector<Binding> b;
  auto dbl = [&](std::string key, auto member) {
    b.push_back({key,
                 [key, member](RunConfig& c, const std::string& v) { member(c) = parse_double(key, v); },
                 [member](const RunConfig& c) -> std::optional<std::string> {
                   return format_double(member(const_cast<RunConfig&>(c)));
                 }});
  };
  auto opt_dbl = [&](std::string key, auto member) {
    b.push_back({key,
                 [key, member](RunConfig& c, const std::string& v) { member(c) = parse_double(key, v); },
                 [member](const RunConfig& c) -> std::optional<std::string> {
                   const auto& o = member(const_cast<RunConfig&>(c));
                   if (!o) return std::nullopt;
                   return format_double(*o);
                 }});
  };
  auto integer = [&](std::string key, auto member) {
    b.push_back({key,
                 [key, member](RunConfig& c, const std::string& v) {
                   using T = std::decay_t<decltype(member(c))>;
                   const long long x = parse_integer(key, v);
                   if constexpr (std::is_unsigned_v<T>) {
                     if (x < 0) throw ConfigError(key + ": must be non-negative");
                   }
                   member(c) = static_cast<T>(x);
                 },
                 [member](const RunConfig& c) -> std::optional<std::string> {
                   return std::to_string(member(const_cast<RunConfig&>(c)));
                 }});
  };
  auto boolean = [&](std::string key, auto member) {
    b.push_back({key,
                 [key, member](RunConfig& c, const std::string& v) { member(c) = parse_bool(key, v); },
                 [member](const RunConfig& c) -> std::optional<std::string> {
                   return member(const_cast<RunConfig&>(c)) ? "true" : "false";
                 }});
  };

  integer("grid.n", [](RunConfig& c) -> auto& { return c.grid.n; });
  dbl("grid.box_length", [](RunConfig& c) -> auto& { return c.grid.box_length; });
  dbl("grid.dealias_fraction", [](RunConfig& c) -> auto& { return c.grid.dealias_fraction; });

  dbl("physics.nu", [](RunConfig& c) -> auto& { return c.physics.nu; });
  dbl("physics.mu_resistivity", [](RunConfig& c) -> auto& { return c.physics.mu_resistivity; });
  dbl("physics.hall_coefficient", [](RunConfig& c) -> auto& { return c.physics.hall_coefficient; });
  b.push_back({"physics.form",
               [](RunConfig& c, const std::string& v) {
                 if (v == "divergence") c.physics.form = RhsForm::divergence;
                 else if (v == "primitive") c.physics.form = RhsForm::primitive;
                 else throw ConfigError("physics.form: expected divergence or primitive, got '" + v + "'");
               },
               [](const RunConfig& c) -> std::optional<std::string> {
                 return c.physics.form == RhsForm::divergence ? "divergence" : "primitive";
               }});
  boolean("physics.nonlinear", [](RunConfig& c) -> auto& { return c.physics.nonlinear; });

  b.push_back({"init.kind",
               [](RunConfig& c, const std::string& v) {
                 try {
                   c.init.spec.kind = parse_init_kind(v);
                 } catch (const InvalidArgument& e) {
                   throw ConfigError(std::string("init.kind: ") + e.what());
                 }
               },
               [](const RunConfig& c) -> std::optional<std::string> { return to_string(c.init.spec.kind); }});
  dbl("init.amplitude", [](RunConfig& c) -> auto& { return c.init.spec.amplitude; });
  dbl("init.b_amplitude", [](RunConfig& c) -> auto& { return c.init.spec.b_amplitude; });
  for (int axis = 0; axis < 3; ++axis) {
    const std::string key = std::string("init.center_") + "xyz"[axis];
    b.push_back({key,
                 [key, axis](RunConfig& c, const std::string& v) {
                   if (!c.init.spec.center) {
                     const double mid = 0.5 * c.grid.box_length;
                     c.init.spec.center = std::array<double, 3>{mid, mid, mid};
                   }
                   (*c.init.spec.center)[static_cast<std::size_t>(axis)] = parse_double(key, v);
                 },
                 [axis](const RunConfig& c) -> std::optional<std::string> {
                   if (!c.init.spec.center) return std::nullopt;
                   return format_double((*c.init.spec.center)[static_cast<std::size_t>(axis)]);
                 }});
  }
  dbl("init.width", [](RunConfig& c) -> auto& { return c.init.spec.width; });
  dbl("init.band_lo", [](RunConfig& c) -> auto& { return c.init.spec.band_lo; });
  dbl("init.band_hi", [](RunConfig& c) -> auto& { return c.init.spec.band_hi; });
  integer("init.seed", [](RunConfig& c) -> auto& { return c.init.spec.seed; });
  opt_dbl("init.target_norm", [](RunConfig& c) -> auto& { return c.init.target_norm; });
  integer("init.target_m", [](RunConfig& c) -> auto& { return c.init.target_m; });

  dbl("time.t_end", [](RunConfig& c) -> auto& { return c.time.t_end; });
  dbl("time.sample_interval", [](RunConfig& c) -> auto& { return c.time.sample_interval; });
  dbl("time.cfl_advective", [](RunConfig& c) -> auto& { return c.time.control.cfl_advective; });
  dbl("time.cfl_whistler", [](RunConfig& c) -> auto& { return c.time.control.cfl_whistler; });
  dbl("time.dt_min", [](RunConfig& c) -> auto& { return c.time.control.dt_min; });
  dbl("time.dt_max", [](RunConfig& c) -> auto& { return c.time.control.dt_max; });
  dbl("time.blowup_threshold", [](RunConfig& c) -> auto& { return c.time.control.blowup_threshold; });

  integer("analysis.m_max", [](RunConfig& c) -> auto& { return c.analysis.m_max; });
  integer("analysis.linf_order", [](RunConfig& c) -> auto& { return c.analysis.linf_order; });
  dbl("analysis.k_const", [](RunConfig& c) -> auto& { return c.analysis.k_const; });
  dbl("analysis.alpha", [](RunConfig& c) -> auto& { return c.analysis.alpha; });
  opt_dbl("analysis.fit_t_a", [](RunConfig& c) -> auto& { return c.analysis.fit_t_a; });
  opt_dbl("analysis.fit_t_b", [](RunConfig& c) -> auto& { return c.analysis.fit_t_b; });
  dbl("analysis.min_span_factor", [](RunConfig& c) -> auto& { return c.analysis.min_span_factor; });
  dbl("analysis.decay_mu", [](RunConfig& c) -> auto& { return c.analysis.decay_mu; });
  dbl("analysis.fit_tolerance", [](RunConfig& c) -> auto& { return c.analysis.fit_tolerance; });
  boolean("analysis.audit_energy", [](RunConfig& c) -> auto& { return c.analysis.audit_energy; });
  dbl("analysis.energy_tolerance", [](RunConfig& c) -> auto& { return c.analysis.energy_tolerance; });
  boolean("analysis.audit_fourier", [](RunConfig& c) -> auto& { return c.analysis.audit_fourier; });
  boolean("analysis.audit_low_frequency", [](RunConfig& c) -> auto& { return c.analysis.audit_low_frequency; });
  integer("analysis.low_frequency_j", [](RunConfig& c) -> auto& { return c.analysis.low_frequency_j; });
  boolean("analysis.audit_splitting", [](RunConfig& c) -> auto& { return c.analysis.audit_splitting; });
  boolean("analysis.audit_monotonicity", [](RunConfig& c) -> auto& { return c.analysis.audit_monotonicity; });
  integer("analysis.monotonicity_m", [](RunConfig& c) -> auto& { return c.analysis.monotonicity_m; });
  boolean("analysis.audit_lemma23", [](RunConfig& c) -> auto& { return c.analysis.audit_lemma23; });
  integer("analysis.lemma23_m", [](RunConfig& c) -> auto& { return c.analysis.lemma23_m; });

  b.push_back({"output.directory",
               [](RunConfig& c, const std::string& v) {
                 if (v.empty()) throw ConfigError("output.directory must not be empty");
                 c.output.directory = v;
               },
               [](const RunConfig& c) -> std::optional<std::string> { return c.output.directory; }});
  integer("output.checkpoint_every", [](RunConfig& c) -> auto& { return c.output.checkpoint_every; });
  return b;
}

inline const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b = make_bindings();
  return b;
}

inline std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

}  // namespace detail

/// Checks every cross-field constraint; throws ConfigError naming the first failure.
inline void validate(const RunConfig& c) {
  auto wrap = [](auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  };
  if (c.grid.n == 0) throw ConfigError("grid.n is required");
  wrap([&] { (void)make_grid(c.grid.n, c.grid.box_length, c.grid.dealias_fraction); });
  wrap([&] { c.physics.validate(); });
  wrap([&] { c.time.control.validate(); });
  if (!(c.time.t_end > 0.0) && c.time.t_end != 0.0) throw ConfigError("time.t_end must be >= 0");
  if (!(c.time.sample_interval > 0.0)) throw ConfigError("time.sample_interval must be positive");
  const double ratio = c.time.t_end / c.time.sample_interval;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("time.sample_interval must divide time.t_end");
  }
  if (!(c.init.spec.width > 0.0)) throw ConfigError("init.width must be positive");
  if (!(c.init.spec.amplitude >= 0.0) || !(c.init.spec.b_amplitude >= 0.0)) {
    throw ConfigError("init amplitudes must be non-negative");
  }
  if (c.init.spec.kind == InitKind::random_band &&
      (!(c.init.spec.band_lo >= 0.0) || !(c.init.spec.band_hi >= c.init.spec.band_lo))) {
    throw ConfigError("init.band_lo/band_hi must satisfy 0 <= lo <= hi");
  }
  if (c.init.target_norm && !(*c.init.target_norm > 0.0)) {
    throw ConfigError("init.target_norm must be positive");
  }
  if (c.init.target_m < 0) throw ConfigError("init.target_m must be >= 0");
  const auto& a = c.analysis;
  if (a.m_max < 0 || a.m_max > 16) throw ConfigError("analysis.m_max must lie in [0, 16]");
  if (a.linf_order < 0 || a.linf_order > 6) throw ConfigError("analysis.linf_order must lie in [0, 6]");
  if (!(a.k_const > 0.0)) throw ConfigError("analysis.k_const must be positive");
  if (!(a.alpha > 0.0)) throw ConfigError("analysis.alpha must be positive");
  if (a.fit_t_a.has_value() != a.fit_t_b.has_value()) {
    throw ConfigError("analysis.fit_t_a and analysis.fit_t_b must be given together");
  }
  if (a.fit_t_a && !(*a.fit_t_b > *a.fit_t_a)) throw ConfigError("analysis.fit_t_b must exceed fit_t_a");
  if (!(a.min_span_factor >= 1.0)) throw ConfigError("analysis.min_span_factor must be >= 1");
  if (!(a.decay_mu >= 0.0)) throw ConfigError("analysis.decay_mu must be >= 0");
  if (a.low_frequency_j < 1) throw ConfigError("analysis.low_frequency_j must be >= 1");
  if (a.audit_monotonicity && (a.monotonicity_m < 0 || a.monotonicity_m > a.m_max)) {
    throw ConfigError("analysis.monotonicity_m must lie in [0, analysis.m_max]");
  }
  if (a.audit_lemma23) {
    if (a.lemma23_m < 1 || a.lemma23_m > a.m_max) {
      throw ConfigError("analysis.lemma23_m must lie in [1, analysis.m_max]");
    }
    if (a.linf_order < lemma23_linf_order(a.lemma23_m)) {
      throw ConfigError("analysis.linf_order must be >= " +
                        std::to_string(lemma23_linf_order(a.lemma23_m)) + " for the lemma23 audit");
    }
  }
  if (c.output.checkpoint_every < 0) throw ConfigError("output.checkpoint_every must be >= 0");
}

/// Parses the sectioned key/value grammar:
///   # comment            [section]            key = value          section.key = value
/// Values are numbers, true/false, or (optionally double-quoted) words.
inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, const detail::Binding*> table;
  for (const auto& b : detail::bindings()) {
    table[b.key] = &b;
  }
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section.empty() || section.find_first_of(" \t.=") != std::string::npos) {
        throw ConfigError("bad section name '" + section + "'", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::unquote(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("missing key", line_no);
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line_no);
      key = section + "." + key;
    }
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'", line_no);
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(prev->second) + ")",
                        line_no);
    }
    seen[key] = line_no;
    try {
      it->second->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
  if (!seen.count("grid.n")) throw ConfigError("grid.n is required");
  if (!seen.count("time.t_end")) throw ConfigError("time.t_end is required");
  validate(c);
  return c;
}

/// Canonical text for a config; parse_config(render_config(c)) == c.
inline std::string render_config(const RunConfig& c) {
  std::ostringstream out;
  std::string current;
  for (const auto& b : detail::bindings()) {
    const auto value = b.get(c);
    if (!value) continue;
    const auto dot = b.key.find('.');
    const std::string section = b.key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << "\n";
      out << "[" << section << "]\n";
      current = section;
    }
    std::string v = *value;
    if (v.find_first_of("#\" \t") != std::string::npos || v.empty()) {
      v = "\"" + v + "\"";
    }
    out << b.key.substr(dot + 1) << " = " << v << "\n";
  }
  return out.str();
}

/// Applies one "section.key=value" override (used by sweeps and the CLI).
inline RunConfig with_override(const RunConfig& base, const std::string& key, const std::string& value) {
  RunConfig c = base;
  for (const auto& b : detail::bindings()) {
    if (b.key == key) {
      b.set(c, value);
      validate(c);
      return c;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

inline GridSpec grid_from(const RunConfig& c) {
  return make_grid(c.grid.n, c.grid.box_length, c.grid.dealias_fraction);
}

}  // namespace hallmhd
