#pragma once

/// @file cli.hpp
/// The opa command-line front end, callable in-process through run_cli.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "opa/opa.hpp"

namespace opa::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNotConverged = 3, kInconsistent = 4 };

/// Raised for malformed input; maps to exit status 2.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Logging

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// OPA_LOG: quiet|info|debug or 0|1|2. Unset means quiet.
inline LogLevel log_level_from_env() {
  const char* v = std::getenv("OPA_LOG");
  if (!v) return LogLevel::quiet;
  const std::string s(v);
  if (s == "debug" || s == "2") return LogLevel::debug;
  if (s == "info" || s == "1") return LogLevel::info;
  return LogLevel::quiet;
}

class Log {
 public:
  Log(std::ostream& os, LogLevel level) : os_(os), level_(level) {}
  template <class... Args>
  void info(const char* fmt, Args... args) const { emit(LogLevel::info, fmt, args...); }
  template <class... Args>
  void debug(const char* fmt, Args... args) const { emit(LogLevel::debug, fmt, args...); }

 private:
  template <class... Args>
  void emit(LogLevel at, const char* fmt, Args... args) const {
    if (static_cast<int>(level_) < static_cast<int>(at)) return;
    char buf[512];
    if constexpr (sizeof...(Args) == 0) std::snprintf(buf, sizeof buf, "%s", fmt);
    else std::snprintf(buf, sizeof buf, fmt, args...);
    os_ << "[opa] " << buf << '\n';
  }
  std::ostream& os_;
  LogLevel level_;
};

// Parsing

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(std::string("invalid ") + what + ": '" + s + "'");
  }
}

inline std::size_t parse_size(const std::string& s, const char* what) {
  static const std::regex re(R"(\d+)");
  if (!std::regex_match(s, re)) throw SchemaError(std::string("invalid ") + what + ": '" + s + "'");
  return static_cast<std::size_t>(std::stoull(s));
}

/// "pi/2", "3pi/4", "-pi/3", "2*pi/3", "pi", "0"; other numbers are radians.
inline Angle parse_angle(const std::string& text) {
  const std::string s = trim(text);
  static const std::regex re(R"(([+-]?)(\d*)\*?pi(?:/(\d+))?)");
  std::smatch m;
  if (std::regex_match(s, m, re)) {
    std::int64_t num = m[2].length() ? std::stoll(m[2].str()) : 1;
    if (m[1] == "-") num = -num;
    const std::int64_t den = m[3].length() ? std::stoll(m[3].str()) : 1;
    if (den == 0) throw SchemaError("angle denominator is zero: '" + s + "'");
    return Angle::pi_times(num, den);
  }
  static const std::regex zero(R"([+-]?0+(\.0*)?)");
  if (std::regex_match(s, zero)) return Angle::pi_times(0, 1);
  return Angle::from_radians(parse_double(s, "angle"));
}

/// "<angle>:<mult>" with mult defaulting to 1.
inline CircleRoot parse_root(const std::string& text) {
  const auto colon = text.rfind(':');
  CircleRoot r;
  if (colon == std::string::npos) {
    r.angle = parse_angle(text);
    return r;
  }
  r.angle = parse_angle(text.substr(0, colon));
  const auto mult = parse_size(trim(text.substr(colon + 1)), "root multiplicity");
  if (mult == 0) throw SchemaError("root multiplicity must be positive");
  r.mult = static_cast<unsigned>(mult);
  return r;
}

/// Comma separated roots; the product is scaled so that f(0) = 1.
inline CircleZeroSpec parse_roots(const std::string& text) {
  CircleZeroSpec spec;
  for (const auto& part : split(text, ','))
    if (!part.empty()) spec.roots.push_back(parse_root(part));
  if (spec.roots.empty()) throw SchemaError("no roots given");
  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw SchemaError(e.what());
  }
  return spec.normalized_at_origin();
}

inline cplx parse_complex_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw SchemaError("coefficient must be a number or [re, im]: " + j.dump());
}

/// "1,-1" (real) or a JSON array of numbers / [re, im] pairs.
inline Poly parse_coeffs(const std::string& text) {
  const std::string s = trim(text);
  std::vector<cplx> c;
  if (!s.empty() && s.front() == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(s);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("coefficients are not valid JSON: ") + e.what());
    }
    if (!j.is_array()) throw SchemaError("coefficients must be an array");
    for (const auto& x : j) c.push_back(parse_complex_json(x));
  } else {
    for (const auto& part : split(s, ',')) c.push_back(parse_double(part, "coefficient"));
  }
  Poly f(std::move(c));
  if (f.is_zero()) throw SchemaError("f must not be the zero polynomial");
  return f;
}

/// "n" or "a..b" (doubling grid a, 2a, ..., b).
inline std::vector<std::size_t> parse_n_range(const std::string& text) {
  const std::string s = trim(text);
  const auto dots = s.find("..");
  if (dots == std::string::npos) return {parse_size(s, "degree")};
  const auto lo = parse_size(trim(s.substr(0, dots)), "degree");
  const auto hi = parse_size(trim(s.substr(dots + 2)), "degree");
  if (lo > hi) throw SchemaError("empty degree range '" + s + "'");
  return geometric_grid(lo, hi);
}

inline Exponent parse_exponent(const std::string& text) {
  const std::string s = trim(text);
  if (s == "inf" || s == "infinity" || s == "Inf") return Exponent::infinity();
  const double p = parse_double(s, "exponent");
  if (!(p >= 1.0) || !std::isfinite(p)) throw SchemaError("exponent must be >= 1 or 'inf'");
  return Exponent::finite(p);
}

inline Exponent parse_exponent_json(const nlohmann::json& j) {
  if (j.is_number()) {
    const double p = j.get<double>();
    if (!(p >= 1.0) || !std::isfinite(p)) throw SchemaError("exponent must be >= 1 or 'inf'");
    return Exponent::finite(p);
  }
  if (j.is_string()) return parse_exponent(j.get<std::string>());
  throw SchemaError("p must be a number or \"inf\"");
}

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw SchemaError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw SchemaError(std::string("unknown key '") + key + "' in " + where);
  }
}

/// {"kind":"power","alpha":a} or {"kind":"table","values":[...],"tail":"power"|"constant"}.
inline Weight parse_weight_json(const nlohmann::json& j) {
  require_keys(j, {"kind", "alpha", "values", "tail", "doubling", "k_test"}, "weight");
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "power") {
      if (!j.contains("alpha") || !j["alpha"].is_number()) throw SchemaError("power weight needs numeric alpha");
      return Weight::power(j["alpha"].get<double>());
    }
    if (kind == "table") {
      if (!j.contains("values") || !j["values"].is_array()) throw SchemaError("table weight needs values");
      std::vector<double> values;
      for (const auto& v : j["values"]) {
        if (!v.is_number()) throw SchemaError("table weight values must be numbers");
        values.push_back(v.get<double>());
      }
      const std::string tail = j.value("tail", "power");
      if (tail != "power" && tail != "constant") throw SchemaError("tail must be 'power' or 'constant'");
      std::optional<double> doubling;
      if (j.contains("doubling")) doubling = j["doubling"].get<double>();
      const std::size_t k_test = j.value("k_test", kDefaultKTest);
      return Weight::table(std::move(values), tail == "power" ? Weight::Tail::power : Weight::Tail::constant,
                           doubling, k_test);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("weight: ") + e.what());
  }
  throw SchemaError("weight kind must be 'power' or 'table'");
}

/// {"coeffs":[...]} or {"circle_roots":[{"angle":"pi/2","mult":2}, ...]}.
inline SweepProblem parse_problem_json(const nlohmann::json& j) {
  require_keys(j, {"coeffs", "circle_roots"}, "problem");
  if (j.contains("coeffs") == j.contains("circle_roots"))
    throw SchemaError("problem needs exactly one of 'coeffs' and 'circle_roots'");
  if (j.contains("coeffs")) return SweepProblem::from_poly(parse_coeffs(j["coeffs"].dump()));
  const auto& roots = j["circle_roots"];
  if (!roots.is_array() || roots.empty()) throw SchemaError("circle_roots must be a non-empty array");
  std::string text;
  for (const auto& r : roots) {
    require_keys(r, {"angle", "mult"}, "circle root");
    if (!r.contains("angle")) throw SchemaError("circle root needs an angle");
    const std::string angle = r["angle"].is_string() ? r["angle"].get<std::string>() : r["angle"].dump();
    const auto mult = r.value("mult", 1);
    if (mult < 1) throw SchemaError("root multiplicity must be positive");
    if (!text.empty()) text += ',';
    text += angle + ":" + std::to_string(mult);
  }
  return SweepProblem::from_spec(parse_roots(text));
}

inline SolverChoice parse_solver(const std::string& s) {
  if (s == "auto") return SolverChoice::automatic;
  if (s == "convex") return SolverChoice::convex;
  if (s == "hilbert") return SolverChoice::hilbert;
  if (s == "structural") return SolverChoice::structural;
  if (s == "flat") return SolverChoice::flat;
  if (s == "closed") return SolverChoice::closed;
  throw SchemaError("unknown solver '" + s + "'");
}

// JSON output with 17 significant digits

namespace detail {

inline std::string number_text(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool is_scalar(const nlohmann::ordered_json& j) { return !j.is_array() && !j.is_object(); }

inline bool is_flat_array(const nlohmann::ordered_json& j) {
  return j.is_array() && std::all_of(j.begin(), j.end(), [](const auto& x) {
           return is_scalar(x) || (x.is_array() && std::all_of(x.begin(), x.end(), is_scalar));
         });
}

inline void write_json(std::ostream& os, const nlohmann::ordered_json& j, int indent, bool compact) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_number_float()) {
    os << number_text(j.get<double>());
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    const bool flat = compact || is_flat_array(j);
    os << '[';
    bool first = true;
    for (const auto& x : j) {
      if (!first) os << (flat ? "," : ",");
      if (!flat) os << '\n' << inner;
      write_json(os, x, indent + 1, flat);
      first = false;
    }
    if (!flat) os << '\n' << pad;
    os << ']';
  } else if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << '{';
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) os << ',';
      os << '\n' << inner << nlohmann::ordered_json(key).dump() << ": ";
      write_json(os, value, indent + 1, false);
      first = false;
    }
    os << '\n' << pad << '}';
  } else {
    os << j.dump();
  }
}

}  // namespace detail

inline std::string format_json(const nlohmann::ordered_json& j) {
  std::ostringstream os;
  detail::write_json(os, j, 0, false);
  os << '\n';
  return os.str();
}

inline nlohmann::ordered_json complex_json(cplx c) { return nlohmann::ordered_json::array({c.real(), c.imag()}); }

inline nlohmann::ordered_json poly_json(const Poly& p, std::size_t min_len = 0) {
  auto a = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < std::max(p.size(), min_len); ++k) a.push_back(complex_json(p[k]));
  return a;
}

inline nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

// Run configuration

struct RunConfig {
  std::string command;
  std::optional<SweepProblem> problem;
  Exponent p = Exponent::finite(2.0);
  Weight weight = Weight::power(0.0);
  std::vector<std::size_t> n_grid;
  SolverChoice solver = SolverChoice::automatic;
  std::optional<double> tol;
  SolverOpts opts;
  std::string out_path;
  std::string format;
  unsigned seed = 1;
  bool timing = false;
  std::optional<std::size_t> d;
  std::size_t fit_min_n = 32;

  SpaceParams space() const { return {p, weight}; }
};

/// Reads a config file into `cfg`; keys map one-to-one onto the flags.
inline void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    require_keys(j, {"problem", "space", "n", "solver", "solver_opts", "output", "seed", "d", "fit_min_n"}, "config");
    if (j.contains("problem")) cfg.problem = parse_problem_json(j["problem"]);
    if (j.contains("space")) {
      const auto& s = j["space"];
      require_keys(s, {"p", "weight"}, "space");
      if (s.contains("p")) cfg.p = parse_exponent_json(s["p"]);
      if (s.contains("weight")) cfg.weight = parse_weight_json(s["weight"]);
    }
    if (j.contains("n"))
      cfg.n_grid = j["n"].is_number_unsigned() ? std::vector<std::size_t>{j["n"].get<std::size_t>()}
                                               : parse_n_range(j["n"].get<std::string>());
    if (j.contains("solver")) cfg.solver = parse_solver(j["solver"].get<std::string>());
    if (j.contains("solver_opts")) {
      const auto& o = j["solver_opts"];
      require_keys(o, {"grad_tol", "step_tol", "system_tol", "flat_tol", "max_iters", "flat_max_iters"},
                   "solver_opts");
      cfg.opts.grad_tol = o.value("grad_tol", cfg.opts.grad_tol);
      cfg.opts.step_tol = o.value("step_tol", cfg.opts.step_tol);
      cfg.opts.system_tol = o.value("system_tol", cfg.opts.system_tol);
      cfg.opts.flat_tol = o.value("flat_tol", cfg.opts.flat_tol);
      cfg.opts.max_iters = o.value("max_iters", cfg.opts.max_iters);
      cfg.opts.flat_max_iters = o.value("flat_max_iters", cfg.opts.flat_max_iters);
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      require_keys(o, {"path", "format"}, "output");
      cfg.out_path = o.value("path", cfg.out_path);
      cfg.format = o.value("format", cfg.format);
    }
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("d")) cfg.d = j["d"].get<std::size_t>();
    cfg.fit_min_n = j.value("fit_min_n", cfg.fit_min_n);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config '" + path + "': " + e.what());
  }
}

/// Applies --tol to whichever tolerance stops the chosen solver.
inline void apply_tol(RunConfig& cfg) {
  if (!cfg.tol) return;
  if (!(*cfg.tol > 0.0)) throw SchemaError("--tol must be positive");
  cfg.opts.grad_tol = *cfg.tol;
  cfg.opts.system_tol = *cfg.tol;
  cfg.opts.flat_tol = *cfg.tol;
}

inline void validate_format(RunConfig& cfg) {
  const char* expected = cfg.command == "sweep" ? "csv" : cfg.command == "verify" ? "text" : "json";
  if (cfg.format.empty()) cfg.format = expected;
  if (cfg.format != expected)
    throw SchemaError("output format '" + cfg.format + "' does not match command '" + cfg.command + "' (expects " +
                      expected + ")");
}

/// Writes to cfg.out_path, or to `out` when no path is set.
inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out_path.empty() || cfg.out_path == "-") {
    out << text;
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw SchemaError("cannot write '" + cfg.out_path + "'");
  f << text;
}

inline nlohmann::ordered_json alpha_json(const Weight& w) {
  const auto a = w.alpha();
  return a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json p_json(const Exponent& p) {
  return p.is_infinite() ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(p.value());
}

inline double try_lower_bound(const SweepProblem& prob, std::size_t n, const SpaceParams& sp) {
  try {
    return prob.spec ? lower_bound(*prob.spec, n, sp) : lower_bound(prob.f, n, sp);
  } catch (const InapplicableError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Slack on the lower-bound comparison.
inline constexpr double kLowerBoundSlack = 1e-12;

// Commands

inline int cmd_compute(const RunConfig& cfg, std::ostream& out, const Log& log) {
  if (!cfg.problem) throw SchemaError("compute needs --roots or --coeffs");
  if (cfg.n_grid.size() != 1) throw SchemaError("compute needs a single degree --n");
  const std::size_t n = cfg.n_grid.front();
  const SpaceParams sp = cfg.space();
  const auto& prob = *cfg.problem;
  const SolverChoice choice = resolve_solver(prob, sp, cfg.solver);

  nlohmann::ordered_json extra;
  OpaResult res;
  if (choice == SolverChoice::structural) {
    if (!prob.spec) throw SchemaError("structural solver needs --roots");
    const auto st = solve_structural(*prob.spec, n, sp, std::nullopt, cfg.opts);
    res = st.result;
    auto consts = nlohmann::ordered_json::array();
    for (const auto& c : st.fit.constants)
      consts.push_back({{"root", c.root}, {"power", c.power}, {"value", complex_json(c.value)}});
    extra["constants"] = consts;
    extra["constants_simple_sum"] = complex_json(st.fit.simple_sum());
    extra["fit_residual"] = st.fit.fit_residual;
    extra["system_residual"] = st.fit.system_residual;
  } else if (choice == SolverChoice::flat) {
    const auto fl = solve_flat(prob.f, n, sp, cfg.opts);
    res = fl.result;
    extra["dual_lower"] = fl.diagnostics.lower;
    extra["duality_gap"] = fl.diagnostics.gap;
    extra["unique_along_axes"] = fl.diagnostics.unique_along_axes;
    auto dirs = nlohmann::ordered_json::array();
    for (const auto& d : fl.diagnostics.flat_directions)
      dirs.push_back({{"coefficient", d.coefficient},
                      {"imaginary", d.imaginary},
                      {"extent_plus", d.extent_plus},
                      {"extent_minus", d.extent_minus}});
    extra["flat_directions"] = dirs;
  } else {
    res = solve_with(prob, n, sp, choice, cfg.opts);
  }
  log.info("solver=%s n=%zu iterations=%d converged=%d", res.solver.c_str(), n, res.iterations, res.converged);

  const double lb = try_lower_bound(prob, n, sp);
  const double np = sp.p.is_infinite() ? res.optimal_norm : std::pow(res.optimal_norm, sp.p.value());
  nlohmann::ordered_json j;
  j["command"] = "compute";
  j["solver"] = res.solver;
  j["p"] = p_json(sp.p);
  j["alpha"] = alpha_json(sp.weight);
  j["weight"] = sp.weight.describe();
  j["n"] = n;
  j["f"] = poly_json(prob.f);
  j["coefficients"] = poly_json(res.approximant, n + 1);
  j["residual"] = poly_json(res.residual);
  j["optimal_norm"] = res.optimal_norm;
  j["norm_p_power"] = np;
  j["norm_sq"] = res.optimal_norm * res.optimal_norm;
  j["lower_bound"] = number_or_null(lb);
  j["ortho_residual_max"] = number_or_null(res.ortho_residual_max);
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  for (auto& [k, v] : extra.items()) j[k] = v;
  emit(cfg, out, format_json(j));

  if (!res.converged) return kNotConverged;
  if (std::isfinite(lb) && res.optimal_norm < lb - kLowerBoundSlack) return kInconsistent;
  return kOk;
}

inline std::string fit_summary(const RateFit& fit) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "fitted_exponent=%.6f r_squared=%.6f window=%zu", fit.fitted_exponent,
                fit.r_squared, fit.window_size);
  os << buf;
  if (fit.prediction) {
    std::snprintf(buf, sizeof buf, " regime=%s predicted_exponent=%.6g cyclic=%s", regime_name(fit.prediction->regime),
                  fit.prediction->exponent, fit.prediction->cyclic ? "true" : "false");
    os << buf;
  }
  if (fit.fitted_log_exponent) {
    std::snprintf(buf, sizeof buf, " fitted_log_exponent=%.6f", *fit.fitted_log_exponent);
    os << buf;
  }
  if (fit.band_ratio) {
    std::snprintf(buf, sizeof buf, " band_ratio=%.6f within_band=%s", *fit.band_ratio, fit.within_band ? "true" : "false");
    os << buf;
  }
  if (fit.stagnation_detected) os << " stagnation=true";
  return os.str();
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err, const Log& log) {
  if (!cfg.problem) throw SchemaError("sweep needs --roots or --coeffs");
  if (cfg.n_grid.empty()) throw SchemaError("sweep needs --n");
  const SpaceParams sp = cfg.space();
  SweepOptions so;
  so.fit_min_n = cfg.fit_min_n;
  so.solver = cfg.opts;
  const auto samples = sweep(*cfg.problem, sp, cfg.n_grid, cfg.solver, so);
  for (const auto& s : samples)
    log.info("n=%zu solver=%s norm=%.17g converged=%d", s.n, s.solver.c_str(), s.optimal_norm, s.converged);

  std::ostringstream csv;
  write_csv(csv, samples, sp, cfg.timing);
  emit(cfg, out, csv.str());

  bool all_converged = true;
  bool bound_ok = true;
  for (const auto& s : samples) {
    all_converged = all_converged && s.converged;
    if (std::isfinite(s.lower_bound) && s.optimal_norm < s.lower_bound - kLowerBoundSlack) bound_ok = false;
  }
  std::ostream& summary = cfg.out_path.empty() || cfg.out_path == "-" ? err : out;
  if (!all_converged) {
    summary << "sweep incomplete: non-converged points written with converged=false\n";
    return kNotConverged;
  }
  summary << fit_summary(fit_rates(samples, sp, so)) << '\n';
  if (!bound_ok) {
    summary << "lower bound violated\n";
    return kInconsistent;
  }
  return kOk;
}

/// Accumulates one line per check with its worst deviation.
class Report {
 public:
  void record(const std::string& check, double deviation, double tol) {
    auto it = std::find_if(rows_.begin(), rows_.end(), [&](const Row& r) { return r.check == check; });
    if (it == rows_.end()) {
      rows_.push_back({check, deviation, tol, deviation <= tol});
      return;
    }
    it->max_dev = std::max(it->max_dev, deviation);
    it->pass = it->pass && deviation <= tol;
  }
  void note_unconverged() { unconverged_ = true; }
  bool passed() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const Row& r) { return r.pass; });
  }
  bool unconverged() const { return unconverged_; }
  std::string text() const {
    std::ostringstream os;
    char buf[256];
    for (const auto& r : rows_) {
      std::snprintf(buf, sizeof buf, "%s %s max_dev=%.3e tol=%.1e\n", r.pass ? "PASS" : "FAIL", r.check.c_str(),
                    r.max_dev, r.tol);
      os << buf;
    }
    os << (passed() ? "ALL PASS" : "SOME FAILED") << '\n';
    return os.str();
  }

 private:
  struct Row {
    std::string check;
    double max_dev;
    double tol;
    bool pass;
  };
  std::vector<Row> rows_;
  bool unconverged_ = false;
};

inline double max_coeff_diff(const Poly& a, const Poly& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, const Log& log) {
  if (!cfg.problem) throw SchemaError("verify needs --roots or --coeffs");
  if (cfg.n_grid.empty()) throw SchemaError("verify needs --n");
  const SpaceParams sp = cfg.space();
  const auto& prob = *cfg.problem;
  const Poly& f = prob.f;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Report rep;

  for (const std::size_t n : cfg.n_grid) {
    log.info("verify n=%zu", n);
    const OpaResult res = solve_with(prob, n, sp, cfg.solver, cfg.opts);
    if (!res.converged) rep.note_unconverged();
    const double lb = try_lower_bound(prob, n, sp);
    if (std::isfinite(lb)) rep.record("lower_bound", std::max(0.0, lb - res.optimal_norm), kLowerBoundSlack);

    if (sp.p.is_smooth()) {
      const double p = sp.p.value();
      if (res.converged) rep.record("bj_orthogonality", res.ortho_residual_max, 1e-7);
      const double base = norm(res.residual, sp);
      for (int probe = 0; probe < 100; ++probe) {
        const cplx lambda{unit(rng), unit(rng)};
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, n)(rng);
        const double moved = norm(res.residual + Poly::monomial(j, lambda) * f, sp);
        rep.record("bj_definition", std::max(0.0, base - moved), 1e-8);
      }
      if (p == 2.0) {
        const auto h = solve_hilbert(f, n, sp.weight);
        const auto c = solve_convex(f, n, sp, cfg.opts);
        rep.record("hilbert_vs_convex", max_coeff_diff(h.approximant, c.approximant), 1e-8);
      }
      if (const auto d = match_one_minus_zd(f)) {
        const auto cf = closed_form_one_minus_zd(*d, n, sp);
        const auto c = solve_convex(f, n, sp, cfg.opts);
        rep.record("closed_vs_convex", max_coeff_diff(cf.approximant, c.approximant), 1e-6);
        rep.record("closed_norm_identity", rel_diff(std::pow(c.optimal_norm, p), closed_form_norm_power(*d, n, sp)),
                   1e-10);
      }
      if (prob.spec) {
        const auto st = solve_structural(*prob.spec, n, sp, std::nullopt, cfg.opts);
        const auto c = solve_convex(f, n, sp, cfg.opts);
        rep.record("structural_system", st.fit.system_residual, 1e-6);
        rep.record("structural_fit", st.fit.fit_residual, 1e-6);
        rep.record("structural_vs_convex", rel_diff(st.result.optimal_norm, c.optimal_norm), 1e-6);
        if (prob.spec->max_multiplicity() == 1) {
          const cplx s = st.fit.simple_sum();
          const double np = std::pow(c.optimal_norm, p);
          rep.record("constants_sum_identity", rel_diff(s.real(), np), 1e-8);
          rep.record("constants_sum_real", std::abs(s.imag()), 1e-9);
        }
      }
    } else {
      const auto fl = solve_flat(f, n, sp, cfg.opts);
      rep.record("duality_gap", fl.diagnostics.gap, cfg.opts.flat_tol);
    }

    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t da = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
      const std::size_t db = std::uniform_int_distribution<std::size_t>(0, 8)(rng);
      std::vector<cplx> a(da + 1), b(db + 1);
      for (auto& x : a) x = {unit(rng), unit(rng)};
      for (auto& x : b) x = {unit(rng), unit(rng)};
      const auto m = multiplication_bound_check(Poly(a), Poly(b), sp);
      rep.record("multiplication_bound", m.holds ? 0.0 : m.lhs / m.rhs - 1.0, 0.0);
    }
  }
  std::string text = rep.text();
  if (rep.unconverged()) text += "some solves did not converge\n";
  emit(cfg, out, text);
  if (!rep.passed()) return kInconsistent;
  if (rep.unconverged()) return kNotConverged;
  return kOk;
}

inline int cmd_closed_form(const RunConfig& cfg, std::ostream& out) {
  if (cfg.n_grid.size() != 1) throw SchemaError("closed-form needs a single degree --n");
  std::size_t d = 1;
  if (cfg.d) {
    d = *cfg.d;
  } else if (cfg.problem) {
    const auto m = match_one_minus_zd(cfg.problem->f);
    if (!m) throw SchemaError("closed-form applies to f = 1 - z^d only");
    d = *m;
  }
  if (d == 0) throw SchemaError("--d must be >= 1");
  const std::size_t n = cfg.n_grid.front();
  const SpaceParams sp = cfg.space();
  const double p = sp.smooth_p();
  const std::size_t order = n / d;
  const auto sums = opa::detail::dual_weight_sums(sp.weight.dilate(d), p, order + 1);
  const auto res = closed_form_one_minus_zd(d, n, sp);

  auto deltas = nlohmann::ordered_json::array();
  for (const double s : sums) deltas.push_back(s);
  nlohmann::ordered_json j;
  j["command"] = "closed-form";
  j["f"] = "1 - z^" + std::to_string(d);
  j["p"] = p;
  j["alpha"] = alpha_json(sp.weight);
  j["n"] = n;
  j["d"] = d;
  j["order"] = order;
  j["approximant_formula"] = "p_n(z) = sum_{t=0}^{N} (1 - delta_t^q / delta_{N+1}^q) z^{d t}, N = floor(n/d)";
  j["delta_formula"] = "delta_k^q = sum_{t=0}^{k} omega_{d t}^{-q/p}";
  j["norm_formula"] = "||1 - (1 - z^d) p_n||^p = delta_{N+1}^{-p}";
  j["delta_q"] = deltas;
  j["coefficients"] = poly_json(res.approximant, n + 1);
  j["optimal_norm"] = res.optimal_norm;
  j["norm_p_power"] = closed_form_norm_power(d, n, sp);
  emit(cfg, out, format_json(j));
  return kOk;
}

inline int cmd_classify(const RunConfig& cfg, std::ostream& out, std::optional<double> alpha) {
  if (!alpha) {
    alpha = cfg.weight.alpha();
    if (!alpha) throw SchemaError("classify needs a power weight (--alpha)");
  }
  const auto r = classify(cfg.p, *alpha);
  std::ostringstream os;
  os << (r.cyclic ? "cyclic" : "not cyclic") << '\n';
  os << "p: " << cfg.p.to_string() << '\n';
  os << "alpha: " << detail::number_text(*alpha) << '\n';
  os << "regime: " << regime_name(r.regime) << '\n';
  if (r.regime != Regime::Stagnation) os << "exponent: " << detail::number_text(r.exponent) << '\n';
  os << "rate: ";
  const std::string q = cfg.p.is_infinite() ? "||1 - p_n f||" : "||1 - p_n f||^p";
  switch (r.regime) {
    case Regime::PowerDecay: os << q << " ~ (n+d+1)^" << detail::number_text(r.exponent); break;
    case Regime::LogDecay: os << q << " ~ log(n+d+2)^" << detail::number_text(r.exponent); break;
    case Regime::Stagnation: os << q << " ~ 1"; break;
  }
  os << '\n' << "note: " << r.note << '\n';
  emit(cfg, out, os.str());
  return kOk;
}

// Entry point

/// Runs the CLI on `args` (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal polynomial approximants to 1/f in weighted l^p spaces", "opa"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  RunConfig cfg;
  std::string p_text, n_text, roots_text, coeffs_text, weight_file, solver_text = "auto", config_path;
  std::optional<double> alpha;
  std::optional<std::size_t> d_flag;
  std::optional<int> max_iters;
  std::optional<unsigned> seed;
  bool timing = false;

  const auto add_space = [&](CLI::App* sc) {
    sc->add_option("--p", p_text, "Exponent p >= 1 or 'inf'");
    auto* a = sc->add_option("--alpha", alpha, "Power weight (k+1)^alpha");
    auto* w = sc->add_option("--weight-file", weight_file, "JSON weight table");
    a->excludes(w);
  };
  const auto add_problem = [&](CLI::App* sc) {
    auto* r = sc->add_option("--roots", roots_text, "Circle roots '<angle>:<mult>,...', e.g. '0:1,pi:2'");
    auto* c = sc->add_option("--coeffs", coeffs_text, "Coefficients '1,-1' or '[[re,im],...]'");
    r->excludes(c);
  };
  const auto add_solver = [&](CLI::App* sc) {
    sc->add_option("--solver", solver_text, "convex|hilbert|structural|flat|closed (default: auto)")
        ->check(CLI::IsMember({"auto", "convex", "hilbert", "structural", "flat", "closed"}));
    sc->add_option("--tol", cfg.tol, "Stopping tolerance of the solver");
    sc->add_option("--max-iters", max_iters, "Iteration cap");
  };
  const auto add_common = [&](CLI::App* sc) {
    sc->add_option("--out", cfg.out_path, "Output path (stdout when omitted)");
    sc->add_option("--config", config_path, "JSON config file; flags override it");
  };

  auto* compute = app.add_subcommand("compute", "Optimal approximant of one degree, as JSON");
  add_space(compute);
  add_problem(compute);
  add_solver(compute);
  add_common(compute);
  compute->add_option("--n", n_text, "Degree n");

  auto* sweep_cmd = app.add_subcommand("sweep", "Optimal norms over a degree grid, as CSV");
  add_space(sweep_cmd);
  add_problem(sweep_cmd);
  add_solver(sweep_cmd);
  add_common(sweep_cmd);
  sweep_cmd->add_option("--n", n_text, "Degree grid 'a..b' (doubling) or a single n");
  sweep_cmd->add_flag("--timing", timing, "Record wall-clock times (output no longer byte-identical)");
  sweep_cmd->add_option("--fit-min-n", cfg.fit_min_n, "Smallest n in the fit window");

  auto* verify = app.add_subcommand("verify", "Cross-solver and inequality checks");
  add_space(verify);
  add_problem(verify);
  add_solver(verify);
  add_common(verify);
  verify->add_option("--n", n_text, "Degree grid 'a..b' or a single n");
  verify->add_option("--seed", seed, "Seed for the randomized probes");

  auto* closed = app.add_subcommand("closed-form", "Explicit approximant to 1/(1 - z^d)");
  add_space(closed);
  add_problem(closed);
  add_common(closed);
  closed->add_option("--n", n_text, "Degree n");
  closed->add_option("--d", d_flag, "d in 1 - z^d (default 1)");

  auto* classify_cmd = app.add_subcommand("classify", "Cyclicity verdict and predicted rate");
  add_space(classify_cmd);
  classify_cmd->add_option("--out", cfg.out_path, "Output path (stdout when omitted)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  const Log log(err, log_level_from_env());
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) apply_config_file(config_path, cfg);
    if (!p_text.empty()) cfg.p = parse_exponent(p_text);
    if (alpha) cfg.weight = Weight::power(*alpha);
    if (!weight_file.empty()) {
      std::ifstream in(weight_file);
      if (!in) throw SchemaError("cannot read weight file '" + weight_file + "'");
      try {
        cfg.weight = parse_weight_json(nlohmann::json::parse(in));
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("weight file: ") + e.what());
      }
    }
    if (!roots_text.empty()) cfg.problem = SweepProblem::from_spec(parse_roots(roots_text));
    if (!coeffs_text.empty()) cfg.problem = SweepProblem::from_poly(parse_coeffs(coeffs_text));
    if (!n_text.empty()) cfg.n_grid = parse_n_range(n_text);
    if (solver_text != "auto") cfg.solver = parse_solver(solver_text);
    if (max_iters) {
      if (*max_iters <= 0) throw SchemaError("--max-iters must be positive");
      cfg.opts.max_iters = *max_iters;
      cfg.opts.flat_max_iters = *max_iters;
    }
    if (seed) cfg.seed = *seed;
    if (d_flag) cfg.d = d_flag;
    cfg.timing = timing;
    apply_tol(cfg);
    if (cfg.command != "classify") validate_format(cfg);
    log.debug("command=%s p=%s weight=%s", cfg.command.c_str(), cfg.p.to_string().c_str(),
              cfg.weight.describe().c_str());

    if (cfg.command == "compute") return cmd_compute(cfg, out, log);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err, log);
    if (cfg.command == "verify") return cmd_verify(cfg, out, log);
    if (cfg.command == "closed-form") return cmd_closed_form(cfg, out);
    return cmd_classify(cfg, out, alpha);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const AdmissibilityError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedExponentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InapplicableError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConsistencyError& e) {
    err << "inconsistency: " << e.what() << '\n';
    return kInconsistent;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInconsistent;
  }
}

}  // namespace opa::cli
