#pragma once

/// @file flat.hpp
/// Approximants for p = 1 and p = infinity, where the norm is not strictly
/// convex and optimal approximants need not be unique.
///
/// The nonsmooth problem min_c F(e_0 - M c), M the convolution by f, is solved
/// by a primal-dual first-order iteration with ergodic averaging and adaptive
/// restarts. Optimality is certified by a dual lower bound: any y with
/// M^* y = 0 in the dual unit ball gives F(e_0 - M c) >= Re y_0.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "opa/error.hpp"
#include "opa/result.hpp"

namespace opa {

/// Observed flatness of the objective around the returned minimizer along one
/// real coordinate direction of the approximant's coefficients.
struct FlatDirection {
  std::size_t coefficient;  ///< index k of c_k
  bool imaginary;           ///< direction Re c_k (false) or Im c_k (true)
  double extent_plus;       ///< largest sampled h >= 0 with objective(c + h e) <= opt + tol
  double extent_minus;      ///< same for c - h e
};

struct FlatDiagnostics {
  double upper = 0.0;  ///< objective at the returned approximant
  double lower = 0.0;  ///< certified dual lower bound on the optimal norm
  double gap = 0.0;
  std::vector<FlatDirection> flat_directions;  ///< only directions with a nonzero extent
  bool unique_along_axes = true;  ///< no sampled axis direction is flat
};

struct FlatSolution {
  OpaResult result;
  FlatDiagnostics diagnostics;
};

namespace detail {

/// Projection onto {y : sum_t |y_t| / omega_t <= 1}.
inline void project_weighted_l1(std::vector<cplx>& y, const std::vector<double>& omega) {
  const std::size_t T = y.size();
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) total += std::abs(y[t]) / omega[t];
  if (total <= 1.0) return;
  // x_t = y_t/|y_t| max(|y_t| - lambda v_t, 0), v_t = 1/omega_t.
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto ratio = [&](std::size_t t) { return std::abs(y[t]) * omega[t]; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });
  double sum_vy = 0.0, sum_vv = 0.0, lambda = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t t = order[i];
    const double v = 1.0 / omega[t];
    sum_vy += v * std::abs(y[t]);
    sum_vv += v * v;
    const double cand = (sum_vy - 1.0) / sum_vv;
    const double next = i + 1 < T ? ratio(order[i + 1]) : 0.0;
    lambda = cand;
    if (cand >= next) break;
  }
  lambda = std::max(lambda, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double m = std::abs(y[t]);
    const double shrunk = std::max(m - lambda / omega[t], 0.0);
    y[t] = m > 0.0 ? y[t] * (shrunk / m) : cplx{};
  }
}

class FlatProblem {
 public:
  FlatProblem(const Poly& f, std::size_t n, const SpaceParams& sp)
      : a_(f.coeffs().begin(), f.coeffs().end()), N_(n + 1), T_(n + f.size()), inf_(sp.p.is_infinite()), omega_(T_) {
    for (std::size_t t = 0; t < T_; ++t) omega_[t] = sp.weight(t);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N_), static_cast<Eigen::Index>(N_));
    for (std::size_t j = 0; j < N_; ++j)
      for (std::size_t k = 0; k < N_; ++k) {
        cplx s{};
        for (std::size_t t = std::max(j, k); t < std::min(j, k) + a_.size(); ++t) s += std::conj(a_[t - j]) * a_[t - k];
        G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = s;
      }
    gram_.compute(G);
  }

  std::size_t N() const { return N_; }
  std::size_t T() const { return T_; }

  std::vector<cplx> apply(const std::vector<cplx>& c) const {
    std::vector<cplx> out(T_);
    for (std::size_t k = 0; k < N_; ++k)
      for (std::size_t i = 0; i < a_.size(); ++i) out[k + i] += c[k] * a_[i];
    return out;
  }
  std::vector<cplx> adjoint(const std::vector<cplx>& y) const {
    std::vector<cplx> out(N_);
    for (std::size_t k = 0; k < N_; ++k)
      for (std::size_t i = 0; i < a_.size(); ++i) out[k] += std::conj(a_[i]) * y[k + i];
    return out;
  }

  double objective(const std::vector<cplx>& c) const {
    const auto mc = apply(c);
    double v = 0.0;
    for (std::size_t t = 0; t < T_; ++t) {
      const double m = std::abs((t == 0 ? cplx{1.0} : cplx{}) - mc[t]) * omega_[t];
      v = inf_ ? std::max(v, m) : v + m;
    }
    return v;
  }

  void project_dual(std::vector<cplx>& y) const {
    if (inf_) {
      project_weighted_l1(y, omega_);
    } else {
      for (std::size_t t = 0; t < T_; ++t) {
        const double m = std::abs(y[t]);
        if (m > omega_[t]) y[t] *= omega_[t] / m;
      }
    }
  }

  /// Re y'_0 for y' = y projected onto ker M^* and scaled into the dual ball.
  double dual_bound(const std::vector<cplx>& y) const {
    const auto my = adjoint(y);
    Eigen::VectorXcd rhs(static_cast<Eigen::Index>(N_));
    for (std::size_t k = 0; k < N_; ++k) rhs[static_cast<Eigen::Index>(k)] = my[k];
    const Eigen::VectorXcd u = gram_.solve(rhs);
    std::vector<cplx> uc(u.data(), u.data() + u.size());
    const auto mu = apply(uc);
    std::vector<cplx> yp(T_);
    for (std::size_t t = 0; t < T_; ++t) yp[t] = y[t] - mu[t];
    double s = 1.0;
    if (inf_) {
      double total = 0.0;
      for (std::size_t t = 0; t < T_; ++t) total += std::abs(yp[t]) / omega_[t];
      if (total > 1.0) s = 1.0 / total;
    } else {
      for (std::size_t t = 0; t < T_; ++t) {
        const double m = std::abs(yp[t]);
        if (m > omega_[t]) s = std::min(s, omega_[t] / m);
      }
    }
    return std::max(0.0, s * yp[0].real());
  }

  double operator_norm_bound() const {
    double s = 0.0;
    for (const auto& a : a_) s += std::abs(a);
    return s;
  }

 private:
  std::vector<cplx> a_;
  std::size_t N_;
  std::size_t T_;
  bool inf_;
  std::vector<double> omega_;
  Eigen::LLT<Eigen::MatrixXcd> gram_;
};

}  // namespace detail

/// Minimizes ||1 - P f|| for p in {1, infinity} to duality gap opts.flat_tol.
///
/// Returns one element of the (possibly non-unique) optimal set together with
/// a probe of the flat directions around it.
inline FlatSolution solve_flat(const Poly& f, std::size_t n, const SpaceParams& sp, const SolverOpts& opts = {}) {
  detail::require_nonzero(f);
  detail::require_degree(n);
  if (sp.p.is_smooth()) throw UnsupportedExponentError("solve_flat handles p = 1 and p = infinity only");

  const detail::FlatProblem prob(f, n, sp);
  const std::size_t N = prob.N();
  const std::size_t T = prob.T();
  const double L = prob.operator_norm_bound();
  const double tau = 0.99 / L;
  const double sigma = 0.99 / L;

  std::vector<cplx> c(N), y(T), c_sum(N), y_sum(T), c_best(N);
  double best_upper = prob.objective(c);
  double best_lower = 0.0;
  c_best = c;
  double weight_sum = 0.0;
  double gap_at_restart = std::numeric_limits<double>::infinity();
  constexpr int kCheckEvery = 64;

  int it = 0;
  bool converged = best_upper - best_lower <= opts.flat_tol;
  for (; it < opts.flat_max_iters && !converged; ++it) {
    const auto my = prob.adjoint(y);
    std::vector<cplx> c_new(N), c_bar(N);
    for (std::size_t k = 0; k < N; ++k) {
      c_new[k] = c[k] + tau * my[k];
      c_bar[k] = 2.0 * c_new[k] - c[k];
    }
    const auto mc = prob.apply(c_bar);
    for (std::size_t t = 0; t < T; ++t) y[t] += sigma * ((t == 0 ? cplx{1.0} : cplx{}) - mc[t]);
    prob.project_dual(y);
    c = std::move(c_new);

    for (std::size_t k = 0; k < N; ++k) c_sum[k] += c[k];
    for (std::size_t t = 0; t < T; ++t) y_sum[t] += y[t];
    weight_sum += 1.0;

    if ((it + 1) % kCheckEvery != 0) continue;
    std::vector<cplx> c_avg(N), y_avg(T);
    for (std::size_t k = 0; k < N; ++k) c_avg[k] = c_sum[k] / weight_sum;
    for (std::size_t t = 0; t < T; ++t) y_avg[t] = y_sum[t] / weight_sum;
    for (const auto* cand : {&c, &c_avg}) {
      const double v = prob.objective(*cand);
      if (v < best_upper) {
        best_upper = v;
        c_best = *cand;
      }
    }
    best_lower = std::max({best_lower, prob.dual_bound(y), prob.dual_bound(y_avg)});
    const double gap = best_upper - best_lower;
    converged = gap <= opts.flat_tol;
    // Restart the averages from the averaged point once the gap has halved.
    if (gap <= 0.5 * gap_at_restart) {
      gap_at_restart = gap;
      c = c_avg;
      y = y_avg;
      std::fill(c_sum.begin(), c_sum.end(), cplx{});
      std::fill(y_sum.begin(), y_sum.end(), cplx{});
      weight_sum = 0.0;
    }
  }

  FlatSolution sol;
  sol.result.solver = "flat";
  sol.result.approximant = Poly(c_best);
  sol.result.iterations = it;
  sol.result.converged = converged;
  finalize(sol.result, f, n, sp);

  auto& diag = sol.diagnostics;
  diag.upper = best_upper;
  diag.lower = best_lower;
  diag.gap = best_upper - best_lower;

  // Flatness probe along each real coordinate axis.
  constexpr double kSteps[] = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0};
  const double tol = std::max(opts.flat_tol, 1e-12);
  for (std::size_t k = 0; k < N; ++k) {
    for (const bool imag : {false, true}) {
      const cplx e = imag ? cplx{0.0, 1.0} : cplx{1.0};
      FlatDirection dir{k, imag, 0.0, 0.0};
      for (const double sign : {1.0, -1.0}) {
        double extent = 0.0;
        for (const double h : kSteps) {
          auto trial = c_best;
          trial[k] += sign * h * e;
          if (prob.objective(trial) <= best_upper + tol) extent = h;
          else break;
        }
        (sign > 0 ? dir.extent_plus : dir.extent_minus) = extent;
      }
      if (dir.extent_plus > 0.0 || dir.extent_minus > 0.0) {
        diag.flat_directions.push_back(dir);
        diag.unique_along_axes = false;
      }
    }
  }
  return sol;
}

/// ||1 - P f|| at an arbitrary P, the objective probed by the flat solver.
inline double flat_objective(const Poly& f, const Poly& P, const SpaceParams& sp) { return norm(one_minus(P, f), sp); }

}  // namespace opa
