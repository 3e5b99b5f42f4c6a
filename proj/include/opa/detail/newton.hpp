#pragma once

/// @file newton.hpp
/// Damped Newton descent for smooth convex objectives in real coordinates.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace opa::detail {

struct NewtonOptions {
  double grad_tol = 1e-10;
  double step_tol = 1e-10;
  int max_iters = 10000;
};

struct NewtonOutcome {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_sup = 0.0;
  double last_step = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stagnated = false;
};

/// Minimizes a convex C^1 function given value, gradient and a (possibly
/// clamped) Hessian.
///
/// `Problem` provides:
///   double value(const VectorXd&) const;
///   void gradient(const VectorXd&, VectorXd& g) const;
///   void hessian(const VectorXd&, MatrixXd& H) const;
///
/// A trial step is accepted on the Armijo condition, or when the directional
/// derivative at the trial point is still non-positive (which for a convex
/// function implies no increase even when the value change is below rounding).
template <class Problem>
NewtonOutcome minimize_newton(const Problem& prob, Eigen::VectorXd x, const NewtonOptions& opts) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const Eigen::Index dim = x.size();

  NewtonOutcome out;
  VectorXd g(dim), g_trial(dim), dx(dim);
  MatrixXd H(dim, dim);
  double f = prob.value(x);
  prob.gradient(x, g);
  double last_step = std::numeric_limits<double>::infinity();

  for (int it = 0; it < opts.max_iters; ++it) {
    out.iterations = it;
    const double gs = dim == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
    const double xs = dim == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
    if (gs <= opts.grad_tol && last_step <= opts.step_tol * std::max(1.0, xs)) {
      out.converged = true;
      break;
    }
    if (gs == 0.0) {
      out.converged = true;
      break;
    }

    prob.hessian(x, H);
    const double diag_scale = std::max(H.diagonal().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    double mu = 0.0;
    bool have_dir = false;
    for (int attempt = 0; attempt < 12 && !have_dir; ++attempt) {
      MatrixXd Hr = H;
      if (mu > 0.0) Hr.diagonal().array() += mu;
      Eigen::LDLT<MatrixXd> ldlt(Hr);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        dx = -ldlt.solve(g);
        if (dx.allFinite() && g.dot(dx) < 0.0) have_dir = true;
      }
      mu = mu == 0.0 ? 1e-12 * diag_scale : mu * 100.0;
    }
    if (!have_dir) dx = -g / diag_scale;

    const double slope = g.dot(dx);
    double t = 1.0;
    bool accepted = false;
    double f_trial = f;
    VectorXd x_trial(dim);
    for (int ls = 0; ls < 80; ++ls, t *= 0.5) {
      x_trial = x + t * dx;
      f_trial = prob.value(x_trial);
      if (!std::isfinite(f_trial)) continue;
      if (f_trial <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      if (f_trial <= f + 16.0 * eps * std::abs(f)) {
        prob.gradient(x_trial, g_trial);
        if (g_trial.dot(dx) <= 0.0) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      out.stagnated = true;
      break;
    }
    last_step = t * dx.lpNorm<Eigen::Infinity>();
    if (last_step == 0.0) {
      out.stagnated = true;
      x = x_trial;
      f = f_trial;
      prob.gradient(x, g);
      break;
    }
    x = x_trial;
    f = f_trial;
    prob.gradient(x, g);
    out.iterations = it + 1;
  }

  out.grad_sup = dim == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
  if (out.stagnated) out.converged = out.grad_sup <= opts.grad_tol;
  out.x = std::move(x);
  out.value = f;
  out.last_step = last_step;
  return out;
}

}  // namespace opa::detail
