#pragma once

/// @file rates.hpp
/// Cyclicity classification, predicted decay of optimal norms, the universal
/// lower bound and empirical rate fitting over degree sweeps.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "opa/closed_form.hpp"
#include "opa/convex.hpp"
#include "opa/error.hpp"
#include "opa/flat.hpp"
#include "opa/hilbert.hpp"
#include "opa/structural.hpp"

namespace opa {

enum class Regime { PowerDecay, LogDecay, Stagnation };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::PowerDecay: return "power";
    case Regime::LogDecay: return "log";
    case Regime::Stagnation: return "stagnation";
  }
  return "?";
}

/// Predicted behaviour of the optimal norm for a polynomial with zeros on the
/// circle. The rate quantity is ||.||^p for finite p and ||.|| for p = infinity.
struct RatePrediction {
  Regime regime = Regime::PowerDecay;
  double exponent = 0.0;  ///< power of (n+d+1) or of log(n+d+2); 0 for stagnation
  bool cyclic = true;
  std::string note;

  /// Predicted size of the rate quantity at degree n, up to constants.
  double predicted(std::size_t n, std::size_t d) const {
    const double x = static_cast<double>(n + d);
    switch (regime) {
      case Regime::PowerDecay: return std::pow(x + 1.0, exponent);
      case Regime::LogDecay: return std::pow(std::log(x + 2.0), exponent);
      case Regime::Stagnation: return 1.0;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// Relative tolerance used to decide alpha = p - 1 for decimal inputs.
inline constexpr double kBoundaryTol = 1e-12;

/// Power / log / stagnation trichotomy for the power weight (k+1)^alpha.
inline RatePrediction classify(const Exponent& p, double alpha) {
  RatePrediction r;
  if (p.is_infinite()) {
    const double crit = 1.0;
    if (std::abs(alpha - crit) <= kBoundaryTol) {
      r.regime = Regime::LogDecay;
      r.exponent = -1.0;
    } else if (alpha < crit) {
      r.regime = Regime::PowerDecay;
      r.exponent = alpha - 1.0;
    } else {
      r.regime = Regime::Stagnation;
    }
    r.cyclic = r.regime != Regime::Stagnation;
    r.note = "rates apply to the norm itself";
    return r;
  }
  const double pv = p.value();
  const double crit = pv - 1.0;
  if (std::abs(alpha - crit) <= kBoundaryTol * std::max(1.0, std::abs(crit))) {
    r.regime = Regime::LogDecay;
    r.exponent = 1.0 - pv;
  } else if (alpha < crit) {
    r.regime = Regime::PowerDecay;
    r.exponent = alpha + 1.0 - pv;
  } else {
    r.regime = Regime::Stagnation;
  }
  r.cyclic = r.regime != Regime::Stagnation;
  if (p.is_one() && r.regime == Regime::LogDecay) {
    r.cyclic = false;
    r.note = "p = 1 boundary: alpha = 0 is not cyclic";
  } else {
    r.note = "rates apply to the p-th power of the norm";
  }
  return r;
}

inline RatePrediction classify(double p, double alpha) { return classify(Exponent::finite(p), alpha); }

/// delta_k = (sum_{t<=k} omega_t^{-q/p})^{1/q}.
inline double delta(std::size_t k, const SpaceParams& sp) {
  const double p = sp.smooth_p();
  const double q = p / (p - 1.0);
  const auto sums = detail::dual_weight_sums(sp.weight, p, k);
  return std::pow(sums[k], 1.0 / q);
}

/// Degree-only form of the lower bound: (sum_{t<=n+d} omega_t^{-q/p})^{-1/q}.
///
/// For p = 1 this is min_{t<=n+d} omega_t and for p = infinity
/// (sum_{t<=n+d} 1/omega_t)^{-1}, the same Hoelder argument with q = infinity, 1.
inline double lower_bound_for_degree(std::size_t d, std::size_t n, const SpaceParams& sp) {
  const std::size_t T = n + d;
  if (sp.p.is_one()) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t <= T; ++t) m = std::min(m, sp.weight(t));
    return m;
  }
  if (sp.p.is_infinite()) {
    double s = 0.0;
    for (std::size_t t = 0; t <= T; ++t) s += 1.0 / sp.weight(t);
    return 1.0 / s;
  }
  return 1.0 / delta(T, sp);
}

/// Roots of f via the companion matrix. f must have degree >= 1.
inline std::vector<cplx> roots(const Poly& f) {
  const auto deg = f.degree();
  if (!deg || *deg == 0) throw ArgumentError("roots needs a polynomial of degree >= 1");
  const auto d = static_cast<Eigen::Index>(*deg);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  const cplx lead = f[*deg];
  for (Eigen::Index i = 1; i < d; ++i) C(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) C(i, d - 1) = -f[static_cast<std::size_t>(i)] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// Distance tolerance for declaring a computed root to lie on the circle.
inline constexpr double kCircleRootTol = 1e-3;

inline bool has_circle_root(const Poly& f, double tol = kCircleRootTol) {
  const auto deg = f.degree();
  if (!deg || *deg == 0) return false;
  for (const cplx z : roots(f))
    if (std::abs(std::abs(z) - 1.0) <= tol) return true;
  return false;
}

/// Lower bound on ||1 - p_n f|| valid whenever f vanishes somewhere on the circle.
inline double lower_bound(const CircleZeroSpec& spec, std::size_t n, const SpaceParams& sp) {
  if (spec.roots.empty()) throw InapplicableError("lower bound needs a zero on the unit circle");
  spec.validate();
  return lower_bound_for_degree(spec.degree(), n, sp);
}

inline double lower_bound(const Poly& f, std::size_t n, const SpaceParams& sp) {
  if (!has_circle_root(f)) throw InapplicableError("lower bound needs a zero on the unit circle");
  return lower_bound_for_degree(*f.degree(), n, sp);
}

/// First n+1 Taylor coefficients of 1/f; needs f(0) != 0.
inline Poly taylor_inverse(const Poly& f, std::size_t n) {
  if (f[0] == cplx{}) throw ArgumentError("taylor_inverse needs f(0) != 0");
  std::vector<cplx> c(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    cplx s = k == 0 ? cplx{1.0} : cplx{};
    for (std::size_t j = 1; j <= k && j < f.size(); ++j) s -= f[j] * c[k - j];
    c[k] = s / f[0];
  }
  return Poly(std::move(c));
}

enum class SolverChoice { automatic, convex, hilbert, structural, flat, closed };

inline const char* solver_choice_name(SolverChoice s) {
  switch (s) {
    case SolverChoice::automatic: return "auto";
    case SolverChoice::convex: return "convex";
    case SolverChoice::hilbert: return "hilbert";
    case SolverChoice::structural: return "structural";
    case SolverChoice::flat: return "flat";
    case SolverChoice::closed: return "closed";
  }
  return "?";
}

/// A polynomial, optionally with its circle-zero description (needed by the
/// structural solver).
struct SweepProblem {
  Poly f;
  std::optional<CircleZeroSpec> spec;

  static SweepProblem from_poly(Poly f) { return {std::move(f), std::nullopt}; }
  static SweepProblem from_spec(const CircleZeroSpec& s) { return {expand(s), s}; }

  std::size_t degree() const { return f.degree().value_or(0); }
};

/// One row of a sweep.
struct SweepSample {
  std::size_t n = 0;
  std::size_t d = 0;
  double optimal_norm = 0.0;
  double norm_p_power = 0.0;  ///< the rate quantity (the norm itself for p = infinity)
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  double predicted_value = std::numeric_limits<double>::quiet_NaN();
  std::string solver;
  bool converged = false;
  int iterations = 0;
  double wall_ms = 0.0;
  OpaResult result;
};

struct SweepOptions {
  std::size_t fit_min_n = 32;
  double band_ratio = 10.0;  ///< R in the log-regime band test
  SolverOpts solver;
};

struct RateFit {
  std::vector<SweepSample> samples;
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> fitted_log_exponent;
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  std::size_t window_size = 0;
  std::optional<RatePrediction> prediction;  ///< only for power weights
  /// max/min over the window of the rate quantity divided by the predicted
  /// log factor; set in the log regime only.
  std::optional<double> band_ratio;
  /// Every such quotient lies in [1/R, R] and band_ratio <= R.
  bool within_band = false;
  bool stagnation_detected = false;
};

/// Slope above which a sweep is considered flat.
inline constexpr double kStagnationSlope = 0.05;

/// Solver the automatic choice resolves to.
inline SolverChoice resolve_solver(const SweepProblem& prob, const SpaceParams& sp, SolverChoice choice) {
  if (choice != SolverChoice::automatic) return choice;
  if (!sp.p.is_smooth()) return SolverChoice::flat;
  if (match_one_minus_zd(prob.f)) return SolverChoice::closed;
  if (sp.p.value() == 2.0) return SolverChoice::hilbert;
  return SolverChoice::convex;
}

/// Runs one solve of the chosen kind.
inline OpaResult solve_with(const SweepProblem& prob, std::size_t n, const SpaceParams& sp, SolverChoice choice,
                            const SolverOpts& opts = {}) {
  switch (resolve_solver(prob, sp, choice)) {
    case SolverChoice::closed: {
      const auto d = match_one_minus_zd(prob.f);
      if (!d) throw ArgumentError("closed-form solver needs f = 1 - z^d");
      return closed_form_one_minus_zd(*d, n, sp);
    }
    case SolverChoice::hilbert:
      if (!sp.p.is_smooth() || sp.p.value() != 2.0) throw ArgumentError("hilbert solver needs p = 2");
      return solve_hilbert(prob.f, n, sp.weight);
    case SolverChoice::convex: return solve_convex(prob.f, n, sp, opts);
    case SolverChoice::structural:
      if (!prob.spec) throw ArgumentError("structural solver needs f given by its circle roots");
      return solve_structural(*prob.spec, n, sp, std::nullopt, opts).result;
    case SolverChoice::flat: return solve_flat(prob.f, n, sp, opts).result;
    case SolverChoice::automatic: break;
  }
  throw ArgumentError("unresolved solver choice");
}

/// Solves at every degree of the grid. Never throws on non-convergence; the
/// samples carry the converged flag.
inline std::vector<SweepSample> sweep(const SweepProblem& prob, const SpaceParams& sp,
                                      const std::vector<std::size_t>& n_grid, SolverChoice choice,
                                      const SweepOptions& opts = {}) {
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw ArgumentError("n_grid must be strictly increasing");
  const auto alpha = sp.weight.alpha();
  const std::optional<RatePrediction> pred =
      alpha ? std::optional<RatePrediction>(classify(sp.p, *alpha)) : std::nullopt;
  const std::size_t d = prob.degree();

  std::vector<SweepSample> out;
  out.reserve(n_grid.size());
  for (const std::size_t n : n_grid) {
    SweepSample s;
    s.n = n;
    s.d = d;
    const auto t0 = std::chrono::steady_clock::now();
    s.result = solve_with(prob, n, sp, choice, opts.solver);
    s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    s.optimal_norm = s.result.optimal_norm;
    s.norm_p_power = sp.p.is_infinite() ? s.optimal_norm : std::pow(s.optimal_norm, sp.p.value());
    s.solver = s.result.solver;
    s.converged = s.result.converged;
    s.iterations = s.result.iterations;
    try {
      s.lower_bound = prob.spec ? lower_bound(*prob.spec, n, sp) : lower_bound(prob.f, n, sp);
    } catch (const InapplicableError&) {
    }
    if (pred) s.predicted_value = pred->predicted(n, d);
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t m = x.size();
  if (m < 2) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace detail

/// Fits the rate quantity over the window n >= opts.fit_min_n (all samples when
/// fewer than two lie in the window).
inline RateFit fit_rates(std::vector<SweepSample> samples, const SpaceParams& sp, const SweepOptions& opts = {}) {
  RateFit fit;
  const auto alpha = sp.weight.alpha();
  if (alpha) fit.prediction = classify(sp.p, *alpha);

  std::vector<const SweepSample*> window;
  for (const auto& s : samples)
    if (s.n >= opts.fit_min_n) window.push_back(&s);
  if (window.size() < 2) {
    window.clear();
    for (const auto& s : samples) window.push_back(&s);
  }
  fit.window_size = window.size();

  std::vector<double> x, xl, y;
  for (const auto* s : window) {
    if (!(s->norm_p_power > 0.0)) throw ConsistencyError("sweep produced a non-positive optimal norm");
    const double m = static_cast<double>(s->n + s->d);
    x.push_back(std::log(m + 1.0));
    xl.push_back(std::log(std::log(m + 2.0)));
    y.push_back(std::log(s->norm_p_power));
  }
  const auto lin = detail::least_squares(x, y);
  fit.fitted_exponent = lin.slope;
  fit.r_squared = lin.r_squared;

  if (fit.prediction && fit.prediction->regime == Regime::LogDecay) {
    fit.fitted_log_exponent = detail::least_squares(xl, y).slope;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto* s : window) {
      const double v = s->norm_p_power / fit.prediction->predicted(s->n, s->d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    fit.band_ratio = hi / lo;
    const double R = opts.band_ratio;
    fit.within_band = lo >= 1.0 / R && hi <= R && *fit.band_ratio <= R;
  }
  fit.stagnation_detected = !window.empty() && fit.fitted_exponent >= -kStagnationSlope;
  fit.samples = std::move(samples);
  return fit;
}

/// Sweep followed by a fit; throws SweepError naming every non-converged n.
inline RateFit sweep_and_fit(const SweepProblem& prob, const SpaceParams& sp, const std::vector<std::size_t>& n_grid,
                             SolverChoice choice = SolverChoice::automatic, const SweepOptions& opts = {}) {
  auto samples = sweep(prob, sp, n_grid, choice, opts);
  std::vector<std::size_t> failing;
  for (const auto& s : samples)
    if (!s.converged) failing.push_back(s.n);
  if (!failing.empty()) {
    std::string msg = "solver did not converge at n =";
    for (const auto n : failing) msg += " " + std::to_string(n);
    throw SweepError(msg, failing);
  }
  return fit_rates(std::move(samples), sp, opts);
}

inline RateFit sweep_and_fit(const CircleZeroSpec& spec, const SpaceParams& sp, const std::vector<std::size_t>& n_grid,
                             SolverChoice choice = SolverChoice::automatic, const SweepOptions& opts = {}) {
  return sweep_and_fit(SweepProblem::from_spec(spec), sp, n_grid, choice, opts);
}

inline RateFit sweep_and_fit(const Poly& f, const SpaceParams& sp, const std::vector<std::size_t>& n_grid,
                             SolverChoice choice = SolverChoice::automatic, const SweepOptions& opts = {}) {
  return sweep_and_fit(SweepProblem::from_poly(f), sp, n_grid, choice, opts);
}

/// Doubling grid lo, 2 lo, 4 lo, ... up to hi (hi always included).
inline std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi) {
  if (lo > hi) throw ArgumentError("empty degree range");
  std::vector<std::size_t> g;
  for (std::size_t n = lo; n < hi; n = n == 0 ? 1 : 2 * n) g.push_back(n);
  g.push_back(hi);
  return g;
}

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "n,d,p,alpha,optimal_norm,norm_p_power,lower_bound,predicted_value,solver,converged,iterations,wall_ms";

/// Writes the sweep as CSV. wall_ms is written as 0 unless with_timing.
inline void write_csv(std::ostream& os, const std::vector<SweepSample>& samples, const SpaceParams& sp,
                      bool with_timing = false) {
  const auto alpha = sp.weight.alpha();
  os << kCsvHeader << '\n';
  for (const auto& s : samples) {
    os << s.n << ',' << s.d << ',' << sp.p.to_string() << ',' << (alpha ? detail::csv_number(*alpha) : "") << ','
       << detail::csv_number(s.optimal_norm) << ',' << detail::csv_number(s.norm_p_power) << ','
       << detail::csv_number(s.lower_bound) << ',' << detail::csv_number(s.predicted_value) << ',' << s.solver << ','
       << (s.converged ? "true" : "false") << ',' << s.iterations << ','
       << detail::csv_number(with_timing ? s.wall_ms : 0.0) << '\n';
  }
}

}  // namespace opa
