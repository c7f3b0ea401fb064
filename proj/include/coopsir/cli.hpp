// Copyright 2026 The coopsir Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coopsir/analytic.hpp"
#include "coopsir/error.hpp"
#include "coopsir/gain_fit.hpp"
#include "coopsir/geometry.hpp"
#include "coopsir/simulate.hpp"
#include "coopsir/specfun.hpp"

namespace coopsir::cli {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::uint64_t kMinCliTrials = 1000;

enum class Command { areas, ccdf, gain, fit, se, misr, validate };
enum class Format { csv, json };

inline constexpr std::array<std::pair<std::string_view, Command>, 7> kCommands{{
    {"areas", Command::areas},
    {"ccdf", Command::ccdf},
    {"gain", Command::gain},
    {"fit", Command::fit},
    {"se", Command::se},
    {"misr", Command::misr},
    {"validate", Command::validate},
}};

inline std::string_view to_string(Command c) {
  for (const auto& [name, cmd] : kCommands)
    if (cmd == c) return name;
  return "?";
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Command parse_command(std::string_view s) {
  for (const auto& [name, cmd] : kCommands)
    if (name == s) return cmd;
  throw UsageError("unknown command '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Number formatting and sweep specs.

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw UsageError("not a number: '" + std::string(s) + "'");
  return v;
}

// "start:stop:step" (stop inclusive), "a,b,c", or a single value. Values
// must be strictly increasing.
inline std::vector<double> parse_sweep(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t colon = text.find(':', pos);
      parts.push_back(parse_number(text.substr(pos, colon - pos)));
      if (colon == std::string_view::npos) break;
      pos = colon + 1;
    }
    if (parts.size() != 3) throw UsageError("sweep must read start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0))
      throw UsageError("sweep needs finite bounds and a positive step");
    if (stop < start) throw UsageError("sweep stop is below start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (n > 1'000'000) throw UsageError("sweep has too many points");
    for (std::size_t i = 0; i < n; ++i) {
      // snap to 12 decimals so 0.1 steps print as written
      const double v = start + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
  } else {
    std::size_t pos = 0;
    for (;;) {
      const std::size_t comma = text.find(',', pos);
      out.push_back(parse_number(text.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) throw UsageError("empty sweep");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw UsageError("sweep values must be strictly increasing");
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  Command command = Command::validate;
  std::optional<std::vector<double>> gamma;
  std::optional<std::vector<double>> alpha;
  std::optional<std::vector<double>> theta_db;
  std::optional<std::uint64_t> trials;
  std::uint64_t seed = 20260101;
  std::optional<double> window_radius;  // empty: auto
  std::string output_path;              // empty: stdout
  Format format = Format::csv;
  simulate::LogBase log_base = simulate::LogBase::two;
  SignalCombining combining = SignalCombining::amplitude;
  unsigned threads = 0;
};

// Defaults that depend on the command.
struct ResolvedConfig {
  Command command;
  std::vector<double> gamma;
  std::vector<double> alpha;
  std::vector<double> theta_db;
  std::uint64_t trials;
  std::uint64_t seed;
  bool window_auto;
  double window_radius;
  Format format;
  simulate::LogBase log_base;
  SignalCombining combining;
  unsigned threads;

  simulate::Options sim_options() const {
    simulate::Options o;
    o.window_radius = window_radius;
    o.combining = combining;
    o.threads = threads;
    return o;
  }
};

inline ResolvedConfig resolve(const RunConfig& c) {
  ResolvedConfig r{};
  r.command = c.command;
  const std::vector<double> unit_grid = parse_sweep("0:1:0.05");
  switch (c.command) {
    case Command::areas:
    case Command::gain:
    case Command::fit:
    case Command::se:
      r.gamma = c.gamma.value_or(unit_grid);
      break;
    case Command::ccdf:
      r.gamma = c.gamma.value_or(std::vector<double>{0.2, 0.5, 1.0});
      break;
    case Command::misr:
      r.gamma = c.gamma.value_or(std::vector<double>{0.0, 0.2, 0.5, 1.0});
      break;
    case Command::validate:
      r.gamma = c.gamma.value_or(std::vector<double>{0.2, 0.5, 1.0});
      break;
  }
  r.alpha = c.alpha.value_or(std::vector<double>{4.0});
  r.theta_db = c.theta_db.value_or(parse_sweep("-10:10:1"));
  r.trials = c.trials.value_or(100'000);
  r.seed = c.seed;
  r.window_auto = !c.window_radius.has_value();
  r.format = c.format;
  r.log_base = c.log_base;
  r.combining = c.combining;
  r.threads = c.threads;

  for (double g : r.gamma)
    if (!(g >= 0.0 && g <= 1.0)) throw UsageError("gamma values must lie in [0, 1]");
  for (double a : r.alpha)
    if (!(a > 2.0) || !std::isfinite(a)) throw UsageError("alpha values must exceed 2");
  if (r.alpha.size() > 1 && r.command != Command::gain && r.command != Command::fit)
    throw UsageError("only the gain and fit commands accept several alpha values");
  for (double t : r.theta_db)
    if (std::isnan(t) || t == std::numeric_limits<double>::infinity())
      throw UsageError("theta_db values must be below +inf");
  const bool simulates = r.command == Command::ccdf || r.command == Command::gain ||
                         r.command == Command::se || r.command == Command::misr ||
                         r.command == Command::validate;
  if (simulates && r.trials < kMinCliTrials)
    throw UsageError("simulation commands need --trials >= " + std::to_string(kMinCliTrials));
  if (c.window_radius && !(*c.window_radius > 0.0 && std::isfinite(*c.window_radius)))
    throw UsageError("window radius must be positive or 'auto'");
  r.window_radius = c.window_radius.value_or(geometry::default_window_radius(1.0));
  return r;
}

namespace detail {

inline std::vector<double> sweep_from_json(const nlohmann::json& j, const char* key) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_string()) return parse_sweep(j.get<std::string>());
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& e : j) {
      if (e.is_number())
        v.push_back(e.get<double>());
      else if (e.is_string())
        v.push_back(parse_number(e.get<std::string>()));
      else
        throw UsageError(std::string("bad entry in '") + key + "'");
    }
    std::string joined;
    for (double x : v) joined += (joined.empty() ? "" : ",") + format_number(x);
    return parse_sweep(joined);
  }
  throw UsageError(std::string("'") + key + "' must be a number, sweep string or array");
}

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw UsageError("format must be csv or json");
}

inline simulate::LogBase parse_log_base(std::string_view s) {
  if (s == "2") return simulate::LogBase::two;
  if (s == "e") return simulate::LogBase::e;
  throw UsageError("log base must be 2 or e");
}

inline SignalCombining parse_combining(std::string_view s) {
  if (s == "amplitude") return SignalCombining::amplitude;
  if (s == "power") return SignalCombining::power;
  throw UsageError("combining must be amplitude or power");
}

inline std::optional<double> parse_window(std::string_view s) {
  if (s == "auto") return std::nullopt;
  return parse_number(s);
}

}  // namespace detail

// Fields of a config document; keys mirror the long flag names.
inline void apply_config_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::array<std::string_view, 12> known{"command", "gamma",  "alpha",   "theta_db",
                                                      "trials",  "seed",   "window_radius", "out",
                                                      "format",  "log_base", "combining",   "threads"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("unknown config key '" + key + "'");
  try {
    if (j.contains("command")) c.command = parse_command(j["command"].get<std::string>());
    if (j.contains("gamma")) c.gamma = detail::sweep_from_json(j["gamma"], "gamma");
    if (j.contains("alpha")) c.alpha = detail::sweep_from_json(j["alpha"], "alpha");
    if (j.contains("theta_db")) c.theta_db = detail::sweep_from_json(j["theta_db"], "theta_db");
    if (j.contains("trials")) c.trials = j["trials"].get<std::uint64_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("window_radius")) {
      const auto& w = j["window_radius"];
      c.window_radius = w.is_string() ? detail::parse_window(w.get<std::string>()) : w.get<double>();
    }
    if (j.contains("out")) c.output_path = j["out"].get<std::string>();
    if (j.contains("format")) c.format = detail::parse_format(j["format"].get<std::string>());
    if (j.contains("log_base")) {
      const auto& b = j["log_base"];
      c.log_base = detail::parse_log_base(b.is_number() ? std::to_string(b.get<int>()) : b.get<std::string>());
    }
    if (j.contains("combining")) c.combining = detail::parse_combining(j["combining"].get<std::string>());
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  RunConfig c;
  apply_config_json(j, c);
  return c;
}

// ---------------------------------------------------------------------------
// Reports.

using Cell = std::variant<double, std::string, bool>;

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> diagnostics;
  bool ok = true;
};

namespace detail {

inline std::string cell_csv(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return std::get<std::string>(c);
}

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

inline std::string cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? format_number(*d) : "null";
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return json_string(std::get<std::string>(c));
}

inline std::string join(const std::vector<double>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(sep) : "") + format_number(v[i]);
  return out;
}

inline std::string json_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + cell_json(v[i]);
  return out + "]";
}

inline std::vector<std::pair<std::string, std::string>> config_echo(const ResolvedConfig& r) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", std::string(to_string(r.command)));
  kv.emplace_back("gamma", join(r.gamma, ","));
  kv.emplace_back("alpha", join(r.alpha, ","));
  kv.emplace_back("theta_db", join(r.theta_db, ","));
  kv.emplace_back("trials", std::to_string(r.trials));
  kv.emplace_back("seed", std::to_string(r.seed));
  kv.emplace_back("window_radius", format_number(r.window_radius) + (r.window_auto ? " (auto)" : ""));
  kv.emplace_back("log_base", r.log_base == simulate::LogBase::two ? "2" : "e");
  kv.emplace_back("combining", r.combining == SignalCombining::amplitude ? "amplitude" : "power");
  return kv;
}

}  // namespace detail

inline std::string render_csv(const ResolvedConfig& r, const Report& rep) {
  std::ostringstream os;
  os << "# coopsir " << kVersion << '\n';
  for (const auto& [k, v] : detail::config_echo(r)) os << "# " << k << ": " << v << '\n';
  for (const auto& [k, v] : rep.diagnostics) os << "# diagnostics." << k << ": " << detail::cell_csv(v) << '\n';
  for (std::size_t i = 0; i < rep.columns.size(); ++i) os << (i ? "," : "") << rep.columns[i];
  os << '\n';
  for (const auto& row : rep.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::cell_csv(row[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string render_json(const ResolvedConfig& r, const Report& rep) {
  std::ostringstream os;
  os << "{\n  \"version\": " << detail::json_string(kVersion) << ",\n";
  os << "  \"config\": {\n";
  os << "    \"command\": " << detail::json_string(to_string(r.command)) << ",\n";
  os << "    \"gamma\": " << detail::json_array(r.gamma) << ",\n";
  os << "    \"alpha\": " << detail::json_array(r.alpha) << ",\n";
  os << "    \"theta_db\": " << detail::json_array(r.theta_db) << ",\n";
  os << "    \"trials\": " << r.trials << ",\n";
  os << "    \"seed\": " << r.seed << ",\n";
  os << "    \"window_radius\": " << format_number(r.window_radius) << ",\n";
  os << "    \"window_radius_auto\": " << (r.window_auto ? "true" : "false") << ",\n";
  os << "    \"log_base\": " << detail::json_string(r.log_base == simulate::LogBase::two ? "2" : "e") << ",\n";
  os << "    \"combining\": "
     << detail::json_string(r.combining == SignalCombining::amplitude ? "amplitude" : "power") << "\n";
  os << "  },\n  \"results\": [";
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    os << (k ? ",\n    {" : "\n    {");
    for (std::size_t i = 0; i < rep.columns.size(); ++i)
      os << (i ? ", " : "") << detail::json_string(rep.columns[i]) << ": " << detail::cell_json(rep.rows[k][i]);
    os << '}';
  }
  os << (rep.rows.empty() ? "],\n" : "\n  ],\n");
  os << "  \"diagnostics\": {";
  for (std::size_t i = 0; i < rep.diagnostics.size(); ++i)
    os << (i ? ",\n    " : "\n    ") << detail::json_string(rep.diagnostics[i].first) << ": "
       << detail::cell_json(rep.diagnostics[i].second);
  os << (rep.diagnostics.empty() ? "}\n}\n" : "\n  }\n}\n");
  return os.str();
}

inline std::string render(const ResolvedConfig& r, const Report& rep) {
  return r.format == Format::csv ? render_csv(r, rep) : render_json(r, rep);
}

// ---------------------------------------------------------------------------
// Commands.

namespace detail {

inline void add_sim_diagnostics(Report& rep, const simulate::Diagnostics& d, std::string_view prefix = "") {
  const std::string p(prefix);
  rep.diagnostics.emplace_back(p + "trials", static_cast<double>(d.trials));
  rep.diagnostics.emplace_back(p + "window_enlargements", static_cast<double>(d.enlargements));
  rep.diagnostics.emplace_back(p + "enlarged_trials", static_cast<double>(d.enlarged_trials));
  rep.diagnostics.emplace_back(p + "resample_flag", d.flagged());
}

inline Report run_areas(const ResolvedConfig& r) {
  Report rep;
  rep.columns = {"gamma", "p1", "p2", "p3", "EN"};
  for (double g : r.gamma) {
    const auto a = geometry::area_fractions(g);
    rep.rows.push_back({g, a.p1, a.p2, a.p3, geometry::mean_serving_count(g)});
  }
  return rep;
}

inline Report run_ccdf(const ResolvedConfig& r, std::ostream& log) {
  Report rep;
  rep.columns = {"gamma", "theta_db", "analytic", "analytic_error", "montecarlo", "mc_stderr", "asymptotic"};
  const double alpha = r.alpha.front();
  log << "ccdf: simulating " << r.trials << " trials over " << r.gamma.size() << " gamma values\n";
  const auto mc = simulate::ccdf_sweep(alpha, r.gamma, r.theta_db, r.trials, r.seed, r.sim_options());
  double max_quad_error = 0.0;
  for (std::size_t g = 0; g < r.gamma.size(); ++g) {
    log << "ccdf: quadrature at gamma=" << format_number(r.gamma[g]) << '\n';
    const double gain = analytic::misr_gain(r.gamma[g], alpha).gain;
    const analytic::CcdfOptions opt{1e-7, r.combining};
    for (std::size_t k = 0; k < r.theta_db.size(); ++k) {
      const double theta = db_to_linear(r.theta_db[k]);
      const auto exact = analytic::ccdf_cooperative(theta, r.gamma[g], alpha, opt);
      max_quad_error = std::max(max_quad_error, exact.error);
      rep.rows.push_back({r.gamma[g], r.theta_db[k], std::clamp(exact.total, 0.0, 1.0), exact.error,
                          mc.curves[g].ccdf[k], mc.curves[g].std_error[k],
                          analytic::shifted_baseline_ccdf(theta, gain, alpha)});
    }
  }
  rep.diagnostics.emplace_back("quadrature_tolerance", 1e-7);
  rep.diagnostics.emplace_back("quadrature_max_error", max_quad_error);
  add_sim_diagnostics(rep, mc.diagnostics);
  return rep;
}

inline Report run_gain(const ResolvedConfig& r, std::ostream& log) {
  Report rep;
  rep.columns = {"alpha", "gamma", "G_dB_analytic", "G_dB_mc", "G_dB_mc_stderr", "difference_db"};
  double max_quad_error = 0.0;
  for (double alpha : r.alpha) {
    log << "gain: alpha=" << format_number(alpha) << ", " << r.trials << " trials\n";
    const auto mc = simulate::misr_sweep(alpha, r.gamma, r.trials, r.seed, r.sim_options());
    for (std::size_t g = 0; g < r.gamma.size(); ++g) {
      const auto exact = analytic::misr_gain(r.gamma[g], alpha);
      max_quad_error = std::max(max_quad_error, exact.error);
      const double total = mc[g].breakdown.total();
      const double g_mc = linear_to_db(mc[g].gain());
      const double se_db = 10.0 / std::numbers::ln10 * mc[g].total_std_error / total;
      const double g_an = exact.gain_db();
      rep.rows.push_back({alpha, r.gamma[g], g_an, g_mc, se_db, g_mc - g_an});
    }
    add_sim_diagnostics(rep, mc.front().diagnostics, "alpha_" + format_number(alpha) + ".");
  }
  rep.diagnostics.emplace_back("quadrature_max_error", max_quad_error);
  return rep;
}

inline Report run_fit(const ResolvedConfig& r, std::ostream& log) {
  Report rep;
  rep.columns = {"alpha", "a", "b", "residual", "max_abs_error_db", "max_abs_error_6tanh3_db"};
  for (double alpha : r.alpha) {
    log << "fit: alpha=" << format_number(alpha) << '\n';
    std::vector<double> g_db;
    for (double g : r.gamma) g_db.push_back(analytic::misr_gain(g, alpha).gain_db());
    const auto fit = analytic::fit_gain_tanh(r.gamma, g_db);
    double worst = 0.0, worst_simple = 0.0;
    for (std::size_t i = 0; i < r.gamma.size(); ++i) {
      worst = std::max(worst, std::abs(fit(r.gamma[i]) - g_db[i]));
      worst_simple = std::max(worst_simple, std::abs(6.0 * std::tanh(3.0 * r.gamma[i]) - g_db[i]));
    }
    rep.rows.push_back({alpha, fit.a, fit.b, fit.residual, worst, worst_simple});
    rep.diagnostics.emplace_back("iterations", static_cast<double>(fit.iterations));
  }
  return rep;
}

inline Report run_se(const ResolvedConfig& r, std::ostream& log) {
  Report rep;
  rep.columns = {"gamma", "mean", "stderr", "delta_vs_first", "delta_stderr", "se_c1", "se_c2", "se_c3"};
  log << "se: " << r.trials << " trials over " << r.gamma.size() << " gamma values\n";
  const auto sw = simulate::se_sweep(r.alpha.front(), r.gamma, r.trials, r.seed, r.sim_options(), r.log_base);
  for (std::size_t g = 0; g < sw.points.size(); ++g) {
    const auto& p = sw.points[g];
    rep.rows.push_back({p.gamma, p.mean, p.std_error, sw.delta[g], sw.delta_std_error[g], p.per_region[0],
                        p.per_region[1], p.per_region[2]});
  }
  const auto crossing = sw.crossing();
  rep.diagnostics.emplace_back("crossing_gamma", crossing ? *crossing : std::numeric_limits<double>::quiet_NaN());
  add_sim_diagnostics(rep, sw.points.front().diagnostics);
  return rep;
}

inline Report run_misr(const ResolvedConfig& r, std::ostream& log) {
  Report rep;
  rep.columns = {"gamma",     "misr_c1",    "misr_c2",    "misr_c3",    "misr_total",      "mc_misr_c1",
                 "mc_misr_c2", "mc_misr_c3", "mc_misr_total", "mc_stderr_total"};
  const double alpha = r.alpha.front();
  log << "misr: " << r.trials << " trials over " << r.gamma.size() << " gamma values\n";
  const auto mc = simulate::misr_sweep(alpha, r.gamma, r.trials, r.seed, r.sim_options());
  for (std::size_t g = 0; g < r.gamma.size(); ++g) {
    const auto b = analytic::misr_gain(r.gamma[g], alpha).breakdown;
    const auto& m = mc[g].breakdown;
    rep.rows.push_back({r.gamma[g], b.misr_c1, b.misr_c2, b.misr_c3, b.total(), m.misr_c1, m.misr_c2, m.misr_c3,
                        m.total(), mc[g].total_std_error});
  }
  static constexpr std::array<const char*, 3> names{"tail_sum_r2", "tail_sum_r3", "tail_sum_r3_beyond"};
  for (int k = 0; k < 3; ++k) {
    rep.diagnostics.emplace_back(names[k], mc.front().tail_sums[k]);
    rep.diagnostics.emplace_back(std::string(names[k]) + "_stderr", mc.front().tail_sums_std_error[k]);
  }
  add_sim_diagnostics(rep, mc.front().diagnostics);
  return rep;
}

// Cross-engine checks at the configured trials and seed.
inline Report run_validate(const ResolvedConfig& r, std::ostream& log) {
  Report rep;
  rep.columns = {"check", "value", "reference", "deviation", "tolerance", "pass"};
  auto check = [&](std::string name, double value, double reference, double tolerance) {
    const double dev = std::abs(value - reference);
    const bool pass = dev <= tolerance;
    rep.ok = rep.ok && pass;
    log << "validate: " << (pass ? "PASS " : "FAIL ") << name << '\n';
    rep.rows.push_back({std::move(name), value, reference, dev, tolerance, pass});
  };
  const double alpha = r.alpha.front();
  const auto opt = r.sim_options();

  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double g = i / 1000.0;
    const auto a = geometry::area_fractions(g);
    worst = std::max(worst, std::abs(a.p1 + 2 * a.p2 + 3 * a.p3 - geometry::mean_serving_count(g)));
  }
  check("mean_serving_polynomial", worst, 0.0, 1e-12);

  worst = 0.0;
  for (double db = -20.0; db <= 20.0; db += 0.5) {
    const double th = db_to_linear(db);
    worst = std::max(worst, std::abs(analytic::ccdf_ppp_baseline(th, 4.0) -
                                     1.0 / (1.0 + std::sqrt(th) * std::atan(std::sqrt(th)))));
  }
  check("baseline_alpha4_closed_form", worst, 0.0, 1e-9);

  worst = 0.0;
  for (double x = 0.0; x <= 20.0; x += 0.25)
    worst = std::max(worst, std::abs(specfun::interference_tail_general(x, 4.0) - specfun::interference_tail_alpha4(x)));
  check("interference_tail_alpha4", worst, 0.0, 1e-12);

  std::vector<double> grid = r.gamma;
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) grid.insert(grid.begin(), 0.0);
  log << "validate: ccdf sweep, " << r.trials << " trials\n";
  const auto mc = simulate::ccdf_sweep(alpha, grid, r.theta_db, r.trials, r.seed, opt);
  const auto misr = simulate::misr_sweep(alpha, grid, r.trials, r.seed + 1, opt);
  const double n = static_cast<double>(r.trials);

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::string tag = "gamma=" + format_number(grid[g]);
    const auto a = geometry::area_fractions(grid[g]);
    const std::array<double, 3> p{a.p1, a.p2, a.p3};
    for (int i = 0; i < 3; ++i)
      check("region_frequency_c" + std::to_string(i + 1) + " " + tag, mc.region_frequency[g][i], p[i],
            3.0 * std::sqrt(p[i] * (1.0 - p[i]) / n) + 1e-12);
    check("mean_serving " + tag, mc.mean_serving[g], geometry::mean_serving_count(grid[g]),
          3.0 * mc.mean_serving_std_error[g] + 1e-12);

    for (std::size_t k = 0; k < r.theta_db.size(); ++k) {
      const double exact =
          analytic::ccdf_cooperative(db_to_linear(r.theta_db[k]), grid[g], alpha, {1e-7, r.combining}).total;
      check("ccdf " + tag + " theta_db=" + format_number(r.theta_db[k]), mc.curves[g].ccdf[k], exact,
            std::max(0.005, 3.0 * mc.curves[g].std_error[k]));
    }

    const auto exact = analytic::misr_gain(grid[g], alpha);
    check("misr_total " + tag, misr[g].breakdown.total(), exact.breakdown.total(),
          std::max(0.02 * exact.breakdown.total(), 3.0 * misr[g].total_std_error));
  }

  for (int k = 0; k < 3; ++k) {
    const double ref = k == 0   ? 1.0 + analytic::relative_distance_tail_sum(2, alpha)
                       : k == 1 ? 1.0 + analytic::relative_distance_tail_sum(3, alpha)
                                : analytic::relative_distance_tail_sum(3, alpha);
    check("tail_sum_" + std::to_string(k + 1), misr.front().tail_sums[k], ref,
          3.0 * misr.front().tail_sums_std_error[k]);
  }

  bool monotone = true;
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t k = 1; k < r.theta_db.size(); ++k)
      monotone = monotone && mc.curves[g].ccdf[k] <= mc.curves[g].ccdf[k - 1];
  check("mc_ccdf_monotone_in_theta", monotone ? 1.0 : 0.0, 1.0, 0.0);

  add_sim_diagnostics(rep, mc.diagnostics);
  return rep;
}

}  // namespace detail

inline Report execute(const ResolvedConfig& r, std::ostream& log) {
  switch (r.command) {
    case Command::areas: return detail::run_areas(r);
    case Command::ccdf: return detail::run_ccdf(r, log);
    case Command::gain: return detail::run_gain(r, log);
    case Command::fit: return detail::run_fit(r, log);
    case Command::se: return detail::run_se(r, log);
    case Command::misr: return detail::run_misr(r, log);
    case Command::validate: return detail::run_validate(r, log);
  }
  throw std::logic_error("unhandled command");
}

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kUsage = 2, kNumerical = 3, kEngine = 4 };

// Runs one configuration and writes its table. Returns the exit status.
inline int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    const ResolvedConfig r = resolve(config);
    const Report rep = execute(r, log);
    const std::string text = render(r, rep);
    if (config.output_path.empty()) {
      std::cout << text << std::flush;
    } else {
      std::ofstream out(config.output_path, std::ios::binary);
      if (!out) throw UsageError("cannot write '" + config.output_path + "'");
      out << text;
    }
    return rep.ok ? kOk : kValidationFailed;
  } catch (const UsageError& e) {
    err << "coopsir: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalAccuracyError& e) {
    err << "coopsir: " << to_string(config.command) << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const ConvergenceError& e) {
    err << "coopsir: " << to_string(config.command) << ": " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "coopsir: " << to_string(config.command) << ": " << e.what() << '\n';
    return kEngine;
  }
}

// ---------------------------------------------------------------------------
// Argument parsing.

struct FlagValues {
  std::string config_path, gamma, alpha, theta_db, window, out, format, log_base, combining;
  std::optional<std::uint64_t> trials, seed;
  std::optional<unsigned> threads;
};

inline void add_common_flags(CLI::App& app, FlagValues& f) {
  app.add_option("--config", f.config_path, "JSON config file (same keys as the flags)");
  app.add_option("--gamma", f.gamma, "cooperation level: value, list a,b,c or sweep start:stop:step");
  app.add_option("--alpha", f.alpha, "path-loss exponent (> 2); gain and fit accept a list");
  app.add_option("--theta-db", f.theta_db, "SIR thresholds in dB: value, list or sweep; -inf allowed");
  app.add_option("--trials", f.trials, "Monte Carlo trials");
  app.add_option("--seed", f.seed, "root seed");
  app.add_option("--window-radius", f.window, "simulation window radius or 'auto'");
  app.add_option("--out", f.out, "output file (default stdout)");
  app.add_option("--format", f.format, "csv or json");
  app.add_option("--log-base", f.log_base, "spectral efficiency log base: 2 or e");
  app.add_option("--combining", f.combining, "amplitude or power");
  app.add_option("--threads", f.threads, "worker threads (0: all cores); output does not depend on it");
}

inline RunConfig merge_flags(std::optional<Command> command, const FlagValues& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_config_file(f.config_path);
  if (command) c.command = *command;
  if (!f.gamma.empty()) c.gamma = parse_sweep(f.gamma);
  if (!f.alpha.empty()) c.alpha = parse_sweep(f.alpha);
  if (!f.theta_db.empty()) c.theta_db = parse_sweep(f.theta_db);
  if (f.trials) c.trials = *f.trials;
  if (f.seed) c.seed = *f.seed;
  if (!f.window.empty()) c.window_radius = detail::parse_window(f.window);
  if (!f.out.empty()) c.output_path = f.out;
  if (!f.format.empty()) c.format = detail::parse_format(f.format);
  if (!f.log_base.empty()) c.log_base = detail::parse_log_base(f.log_base);
  if (!f.combining.empty()) c.combining = detail::parse_combining(f.combining);
  if (f.threads) c.threads = *f.threads;
  return c;
}

inline int main(int argc, char** argv) {
  CLI::App app{"Cooperative transmission in Poisson cellular networks: SIR ccdf, MISR gain, spectral efficiency"};
  app.set_version_flag("--version", std::string(kVersion));
  FlagValues top;
  app.add_option("--config", top.config_path, "JSON config file naming the command");

  std::map<std::string, std::pair<CLI::App*, FlagValues>> subs;
  static const std::map<std::string, std::string> help{
      {"areas", "region area fractions p1, p2, p3 and mean serving count"},
      {"ccdf", "SIR ccdf: quadrature, Monte Carlo and horizontal-shift approximation"},
      {"gain", "horizontal gain G in dB, analytic and Monte Carlo"},
      {"fit", "a*tanh(b*gamma) fit of the analytic gain curve"},
      {"se", "normalized spectral efficiency over a gamma sweep"},
      {"misr", "per-region MISR breakdown, analytic and Monte Carlo"},
      {"validate", "cross-engine checks; nonzero exit on failure"},
  };
  for (const auto& [name, cmd] : kCommands) {
    auto& slot = subs[std::string(name)];
    slot.first = app.add_subcommand(std::string(name), help.at(std::string(name)));
    add_common_flags(*slot.first, slot.second);
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  RunConfig config;
  try {
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
      if (top.config_path.empty()) {
        std::cerr << app.help();
        return kUsage;
      }
      config = merge_flags(std::nullopt, top);
    } else {
      const std::string name = chosen.front()->get_name();
      FlagValues f = subs.at(name).second;
      if (f.config_path.empty()) f.config_path = top.config_path;
      config = merge_flags(parse_command(name), f);
    }
  } catch (const std::exception& e) {
    std::cerr << "coopsir: " << e.what() << '\n';
    return kUsage;
  }
  return run(config, std::cerr, std::cerr);
}

}  // namespace coopsir::cli
