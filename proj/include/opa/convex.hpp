#pragma once

/// @file convex.hpp
/// Optimal approximants for 1 < p < infinity by direct minimization of
/// Phi(c) = sum_t |(1 - P f)^(t)|^p omega_t over the coefficients of P.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "opa/detail/newton.hpp"
#include "opa/hilbert.hpp"
#include "opa/result.hpp"

namespace opa {

namespace detail {

/// Phi in the real coordinates x = (Re c_0, Im c_0, Re c_1, ...).
class ConvexObjective {
 public:
  ConvexObjective(const Poly& f, std::size_t n, const SpaceParams& sp)
      : a_(f.coeffs().begin(), f.coeffs().end()), N_(n + 1), T_(n + f.size()), p_(sp.smooth_p()), w_(T_) {
    for (std::size_t t = 0; t < T_; ++t) w_[t] = sp.weight(t);
  }

  std::size_t dim() const { return 2 * N_; }

  double value(const Eigen::VectorXd& x) const {
    residual(x);
    double s = 0.0;
    for (std::size_t t = 0; t < T_; ++t) {
      const double m = std::abs(r_[t]);
      if (m != 0.0) s += w_[t] * std::pow(m, p_);
    }
    return s;
  }

  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    residual(x);
    // u_t = p omega_t |r_t|^{p-2} r_t, snapped to 0 when r_t is below its rounding level.
    std::vector<cplx> u(T_);
    for (std::size_t t = 0; t < T_; ++t) {
      if (snapped(t)) continue;
      const double m = std::abs(r_[t]);
      u[t] = p_ * w_[t] * std::pow(m, p_ - 2.0) * r_[t];
    }
    g.setZero(static_cast<Eigen::Index>(dim()));
    for (std::size_t k = 0; k < N_; ++k) {
      cplx s{};
      for (std::size_t i = 0; i < a_.size(); ++i) s += std::conj(u[k + i]) * a_[i];
      g[static_cast<Eigen::Index>(2 * k)] = -s.real();
      g[static_cast<Eigen::Index>(2 * k + 1)] = s.imag();
    }
  }

  void hessian(const Eigen::VectorXd& x, Eigen::MatrixXd& H) const {
    residual(x);
    const auto D = static_cast<Eigen::Index>(dim());
    H.setZero(D, D);
    for (std::size_t t = 0; t < T_; ++t) {
      Eigen::Matrix2d h;
      if (snapped(t)) {
        // |w|^p is not twice differentiable at 0 for p < 2: the coordinate is excluded.
        if (p_ == 2.0)
          h = 2.0 * w_[t] * Eigen::Matrix2d::Identity();
        else
          continue;
      } else {
        const double m = std::abs(r_[t]);
        const Eigen::Vector2d uvec(r_[t].real() / m, r_[t].imag() / m);
        h = p_ * w_[t] * std::pow(m, p_ - 2.0) *
            (Eigen::Matrix2d::Identity() + (p_ - 2.0) * uvec * uvec.transpose());
      }
      // Columns of dr_t/dx for the coefficients k with t-k in the support of f.
      const std::size_t k_lo = t + 1 > a_.size() ? t + 1 - a_.size() : 0;
      const std::size_t k_hi = std::min(t, N_ - 1);
      for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const cplx ak = a_[t - k];
        Eigen::Matrix2d Jk;  // columns: d/dRe c_k, d/dIm c_k of (Re r, Im r)
        Jk << -ak.real(), ak.imag(), -ak.imag(), -ak.real();
        const Eigen::Matrix2d hJk = h * Jk;
        for (std::size_t l = k_lo; l <= k_hi; ++l) {
          const cplx al = a_[t - l];
          Eigen::Matrix2d Jl;
          Jl << -al.real(), al.imag(), -al.imag(), -al.real();
          H.block<2, 2>(static_cast<Eigen::Index>(2 * l), static_cast<Eigen::Index>(2 * k)) += Jl.transpose() * hJk;
        }
      }
    }
  }

  static Eigen::VectorXd pack(const Poly& P, std::size_t N) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * N));
    for (std::size_t k = 0; k < N; ++k) {
      x[static_cast<Eigen::Index>(2 * k)] = P[k].real();
      x[static_cast<Eigen::Index>(2 * k + 1)] = P[k].imag();
    }
    return x;
  }
  static Poly unpack(const Eigen::VectorXd& x) {
    std::vector<cplx> c(static_cast<std::size_t>(x.size() / 2));
    for (std::size_t k = 0; k < c.size(); ++k)
      c[k] = {x[static_cast<Eigen::Index>(2 * k)], x[static_cast<Eigen::Index>(2 * k + 1)]};
    return Poly(std::move(c));
  }

 private:
  void residual(const Eigen::VectorXd& x) const {
    if (cached_ && x.size() == cached_x_.size() && x == cached_x_) return;
    r_.assign(T_, cplx{});
    scale_.assign(T_, 0.0);
    r_[0] = 1.0;
    scale_[0] = 1.0;
    for (std::size_t k = 0; k < N_; ++k) {
      const cplx ck{x[static_cast<Eigen::Index>(2 * k)], x[static_cast<Eigen::Index>(2 * k + 1)]};
      if (ck == cplx{}) continue;
      const double ak_abs = std::abs(ck);
      for (std::size_t i = 0; i < a_.size(); ++i) {
        r_[k + i] -= ck * a_[i];
        scale_[k + i] += ak_abs * std::abs(a_[i]);
      }
    }
    cached_x_ = x;
    cached_ = true;
  }

  bool snapped(std::size_t t) const {
    return std::abs(r_[t]) <= 32.0 * std::numeric_limits<double>::epsilon() * scale_[t];
  }

  std::vector<cplx> a_;
  std::size_t N_;
  std::size_t T_;
  double p_;
  std::vector<double> w_;
  mutable std::vector<cplx> r_;
  mutable std::vector<double> scale_;
  mutable Eigen::VectorXd cached_x_;
  mutable bool cached_ = false;
};

}  // namespace detail

/// Minimizes ||1 - P f||_{p,omega} over deg P <= n by damped Newton descent,
/// warm-started from the p = 2 solution.
///
/// Returns converged = false when the gradient tolerance is not met within
/// opts.max_iters.
inline OpaResult solve_convex(const Poly& f, std::size_t n, const SpaceParams& sp, const SolverOpts& opts = {},
                              const std::optional<Poly>& start = std::nullopt) {
  detail::require_nonzero(f);
  detail::require_degree(n);
  sp.smooth_p();
  const std::size_t N = n + 1;

  Poly init;
  if (start) {
    init = *start;
  } else {
    try {
      init = solve_hilbert(f, n, sp.weight).approximant;
    } catch (const IllConditionedError&) {
      init = Poly{};
    }
  }

  const detail::ConvexObjective obj(f, n, sp);
  const detail::NewtonOptions nopts{opts.grad_tol, opts.step_tol, opts.max_iters};
  const auto out = detail::minimize_newton(obj, detail::ConvexObjective::pack(init, N), nopts);

  OpaResult res;
  res.solver = "convex";
  res.approximant = detail::ConvexObjective::unpack(out.x);
  res.iterations = out.iterations;
  res.converged = out.converged;
  res.gradient_sup = out.grad_sup;
  finalize(res, f, n, sp);
  return res;
}

}  // namespace opa
