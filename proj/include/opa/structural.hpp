#pragma once

/// @file structural.hpp
/// Optimal approximants from the exponential-polynomial structure of the
/// residual.
///
/// For f with zeros z_i on the unit circle of multiplicities b_i, the
/// sequence d_t = (1 - p_n f)^(t)^{<p-1>} omega_t, 0 <= t <= n+d, solves the
/// recurrence sum_t d_t a_{t-j} = 0 and therefore has the form
///
///   d_t = sum_i sum_{j=1}^{b_i} A_{i,j} t^{j-1} z_i^t.
///
/// The d complex constants are fixed by the interpolation conditions
/// (1 - p_n f)(z_l) = 1 and (1 - p_n f)^{(s)}(z_l) = 0 for 1 <= s < b_l, which,
/// with B_t = (d_t / omega_t)^{<q-1>}, read
///
///   sum_t B_t t^s z_l^t = [s == 0].
///
/// These are the stationarity conditions of the strictly convex function
///
///   psi(A) = (1/q) sum_t omega_t^{1-q} |d_t(A)|^q - Re sum_i A_{i,1},
///
/// which is what the damped Newton iteration below minimizes.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "opa/convex.hpp"
#include "opa/detail/newton.hpp"
#include "opa/error.hpp"
#include "opa/hilbert.hpp"
#include "opa/result.hpp"

namespace opa {

/// One constant A_{i,j} of the exponential-polynomial representation.
struct FitConstant {
  std::size_t root;  ///< index i into CircleZeroSpec::roots
  unsigned power;    ///< j, multiplying t^{j-1}
  cplx value;
};

/// Constants A_{i,j,n} and how well they describe a residual.
struct ExpPolyFit {
  std::vector<FitConstant> constants;
  double fit_residual = 0.0;     ///< max_t |d_t - sum A t^{j-1} z_i^t|
  double system_residual = 0.0;  ///< max violation of the interpolation system

  /// sum_i A_{i,1}; equals ||1 - p_n f||^p at the optimum.
  cplx simple_sum() const {
    cplx s{};
    for (const auto& c : constants)
      if (c.power == 1) s += c.value;
    return s;
  }
};

namespace detail {

/// Basis phi_k(t) = (t/scale)^{j-1} z_i^t in root order, with (i, j) labels.
struct ExpPolyBasis {
  std::vector<std::size_t> root;
  std::vector<unsigned> power;
  Eigen::MatrixXcd values;  // T x d
  double scale = 1.0;

  ExpPolyBasis(const CircleZeroSpec& spec, std::size_t T) {
    const auto z = spec.points();
    const std::size_t d = spec.degree();
    scale = std::max<double>(1.0, static_cast<double>(T - 1));
    values.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(d));
    std::size_t col = 0;
    for (std::size_t i = 0; i < spec.roots.size(); ++i) {
      for (unsigned j = 1; j <= spec.roots[i].mult; ++j, ++col) {
        root.push_back(i);
        power.push_back(j);
        cplx zt = 1.0;
        for (std::size_t t = 0; t < T; ++t) {
          const double tt = static_cast<double>(t) / scale;
          values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(col)) = std::pow(tt, static_cast<double>(j - 1)) * zt;
          zt *= z[i];
          // Keep z^t on the circle.
          zt /= std::abs(zt);
        }
      }
    }
  }

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }

  /// Unscaled constant from a scaled-basis coefficient.
  cplx unscale(std::size_t k, cplx a) const { return a / std::pow(scale, static_cast<double>(power[k] - 1)); }
};

/// psi in real coordinates x = (Re A~_0, Im A~_0, ...).
class StructuralObjective {
 public:
  StructuralObjective(const ExpPolyBasis& basis, const std::vector<double>& omega, double p)
      : basis_(basis), T_(omega.size()), q_(p / (p - 1.0)), w_(T_) {
    for (std::size_t t = 0; t < T_; ++t) w_[t] = std::pow(omega[t], 1.0 - q_);
  }

  double value(const Eigen::VectorXd& x) const {
    eval(x);
    double s = 0.0;
    for (std::size_t t = 0; t < T_; ++t) {
      const double m = std::abs(D_[t]);
      if (m != 0.0) s += w_[t] * std::pow(m, q_);
    }
    double lin = 0.0;
    for (std::size_t k = 0; k < basis_.dim(); ++k)
      if (basis_.power[k] == 1) lin += x[static_cast<Eigen::Index>(2 * k)];
    return s / q_ - lin;
  }

  /// B_t = omega_t^{1-q} |D_t|^{q-2} conj(D_t), with snapped entries set to 0.
  std::vector<cplx> coefficients(const Eigen::VectorXd& x) const {
    eval(x);
    std::vector<cplx> B(T_);
    for (std::size_t t = 0; t < T_; ++t) {
      if (snapped(t)) continue;
      B[t] = w_[t] * std::pow(std::abs(D_[t]), q_ - 2.0) * std::conj(D_[t]);
    }
    return B;
  }

  /// S_k = sum_t B_t phi_k(t).
  std::vector<cplx> system_lhs(const Eigen::VectorXd& x) const {
    const auto B = coefficients(x);
    std::vector<cplx> S(basis_.dim());
    for (std::size_t k = 0; k < S.size(); ++k) {
      cplx s{};
      for (std::size_t t = 0; t < T_; ++t) s += B[t] * basis_.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      S[k] = s;
    }
    return S;
  }

  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    const auto S = system_lhs(x);
    g.resize(static_cast<Eigen::Index>(2 * S.size()));
    for (std::size_t k = 0; k < S.size(); ++k) {
      g[static_cast<Eigen::Index>(2 * k)] = S[k].real() - (basis_.power[k] == 1 ? 1.0 : 0.0);
      g[static_cast<Eigen::Index>(2 * k + 1)] = -S[k].imag();
    }
  }

  void hessian(const Eigen::VectorXd& x, Eigen::MatrixXd& H) const {
    eval(x);
    const std::size_t d = basis_.dim();
    const auto D = static_cast<Eigen::Index>(2 * d);
    H.setZero(D, D);
    Eigen::MatrixXd J(2, D);
    for (std::size_t t = 0; t < T_; ++t) {
      Eigen::Matrix2d h;
      if (snapped(t)) {
        if (q_ == 2.0)
          h = w_[t] * Eigen::Matrix2d::Identity();
        else
          continue;
      } else {
        const double m = std::abs(D_[t]);
        const Eigen::Vector2d u(D_[t].real() / m, D_[t].imag() / m);
        h = w_[t] * std::pow(m, q_ - 2.0) * (Eigen::Matrix2d::Identity() + (q_ - 2.0) * u * u.transpose());
      }
      for (std::size_t k = 0; k < d; ++k) {
        const cplx ph = basis_.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
        J(0, static_cast<Eigen::Index>(2 * k)) = ph.real();
        J(1, static_cast<Eigen::Index>(2 * k)) = ph.imag();
        J(0, static_cast<Eigen::Index>(2 * k + 1)) = -ph.imag();
        J(1, static_cast<Eigen::Index>(2 * k + 1)) = ph.real();
      }
      H.noalias() += J.transpose() * h * J;
    }
  }

 private:
  void eval(const Eigen::VectorXd& x) const {
    if (cached_ && x == cached_x_) return;
    const std::size_t d = basis_.dim();
    D_.assign(T_, cplx{});
    scale_.assign(T_, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      const cplx a{x[static_cast<Eigen::Index>(2 * k)], x[static_cast<Eigen::Index>(2 * k + 1)]};
      const double aa = std::abs(a);
      for (std::size_t t = 0; t < T_; ++t) {
        const cplx ph = basis_.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
        D_[t] += a * ph;
        scale_[t] += aa * std::abs(ph);
      }
    }
    cached_x_ = x;
    cached_ = true;
  }

  bool snapped(std::size_t t) const {
    return std::abs(D_[t]) <= 32.0 * std::numeric_limits<double>::epsilon() * scale_[t];
  }

  const ExpPolyBasis& basis_;
  std::size_t T_;
  double q_;
  std::vector<double> w_;
  mutable std::vector<cplx> D_;
  mutable std::vector<double> scale_;
  mutable Eigen::VectorXd cached_x_;
  mutable bool cached_ = false;
};

inline std::vector<double> weights_upto(const Weight& w, std::size_t T) {
  std::vector<double> omega(T);
  for (std::size_t t = 0; t < T; ++t) omega[t] = w(t);
  return omega;
}

/// Least-squares scaled-basis coordinates of d_t = residual(t)^{<p-1>} omega_t.
inline Eigen::VectorXcd fit_scaled(const ExpPolyBasis& basis, const Poly& residual, const std::vector<double>& omega, double p) {
  const auto T = static_cast<Eigen::Index>(omega.size());
  Eigen::VectorXcd dt(T);
  for (Eigen::Index t = 0; t < T; ++t)
    dt[t] = signed_power(residual[static_cast<std::size_t>(t)], p - 1.0) * omega[static_cast<std::size_t>(t)];
  return basis.values.colPivHouseholderQr().solve(dt);
}

/// Violation of sum_t B_t t^s z_l^t = [s == 0] in the unscaled form.
inline double system_violation(const ExpPolyBasis& basis, const std::vector<cplx>& B) {
  double worst = 0.0;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    cplx s{};
    for (std::size_t t = 0; t < B.size(); ++t) s += B[t] * basis.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
    s *= std::pow(basis.scale, static_cast<double>(basis.power[k] - 1));
    worst = std::max(worst, std::abs(s - (basis.power[k] == 1 ? cplx{1.0} : cplx{})));
  }
  return worst;
}

inline ExpPolyFit make_fit(const ExpPolyBasis& basis, const Eigen::VectorXcd& scaled, const Poly& residual,
                           const std::vector<double>& omega, double p) {
  ExpPolyFit fit;
  for (std::size_t k = 0; k < basis.dim(); ++k)
    fit.constants.push_back({basis.root[k], basis.power[k], basis.unscale(k, scaled[static_cast<Eigen::Index>(k)])});
  const Eigen::VectorXcd model = basis.values * scaled;
  const double q = p / (p - 1.0);
  std::vector<cplx> B(omega.size());
  for (std::size_t t = 0; t < omega.size(); ++t) {
    const cplx dt = signed_power(residual[t], p - 1.0) * omega[t];
    fit.fit_residual = std::max(fit.fit_residual, std::abs(dt - model[static_cast<Eigen::Index>(t)]));
    B[t] = signed_power(model[static_cast<Eigen::Index>(t)] / omega[t], q - 1.0);
  }
  fit.system_residual = system_violation(basis, B);
  return fit;
}

}  // namespace detail

/// Fits the exponential-polynomial constants to an arbitrary residual
/// 1 - P f of degree <= n + d. system_residual is evaluated at the fitted
/// constants, so a small value certifies the residual as optimal.
inline ExpPolyFit fit_exp_poly(const Poly& residual, const CircleZeroSpec& spec, std::size_t n, const SpaceParams& sp) {
  const double p = sp.smooth_p();
  const std::size_t T = n + spec.degree() + 1;
  const detail::ExpPolyBasis basis(spec, T);
  const auto omega = detail::weights_upto(sp.weight, T);
  const auto scaled = detail::fit_scaled(basis, residual, omega, p);
  return detail::make_fit(basis, scaled, residual, omega, p);
}

struct StructuralSolution {
  OpaResult result;
  ExpPolyFit fit;
};

/// Solves the interpolation system for the constants A_{i,j,n} and rebuilds
/// p_n from them by exact division of 1 - residual by f.
///
/// Starts from the fit of `init`'s residual when given, else from the p = 2
/// approximant; if that Newton solve misses the system tolerance it is
/// rerun from the fit of solve_convex's residual. A failure of both yields
/// converged = false; a residual
/// that f does not divide raises ConsistencyError.
inline StructuralSolution solve_structural(const CircleZeroSpec& spec, std::size_t n, const SpaceParams& sp,
                                           const std::optional<OpaResult>& init = std::nullopt,
                                           const SolverOpts& opts = {}) {
  spec.validate();
  detail::require_degree(n);
  const double p = sp.smooth_p();
  const Poly f = expand(spec);
  const std::size_t d = spec.degree();
  const std::size_t T = n + d + 1;
  const detail::ExpPolyBasis basis(spec, T);
  const auto omega = detail::weights_upto(sp.weight, T);

  Poly start_residual;
  if (init) {
    start_residual = init->residual;
  } else {
    try {
      start_residual = solve_hilbert(f, n, sp.weight).residual;
    } catch (const IllConditionedError&) {
      start_residual = Poly::constant(1.0);
    }
  }
  const auto start_from = [&](const Poly& residual) {
    const Eigen::VectorXcd a0 = detail::fit_scaled(basis, residual, omega, p);
    Eigen::VectorXd x0(static_cast<Eigen::Index>(2 * basis.dim()));
    for (Eigen::Index k = 0; k < a0.size(); ++k) {
      x0[2 * k] = a0[k].real();
      x0[2 * k + 1] = a0[k].imag();
    }
    return x0;
  };

  const detail::StructuralObjective obj(basis, omega, p);
  // The system tolerance is a bound on the gradient of psi.
  const detail::NewtonOptions nopts{std::min(opts.system_tol, 1e-12), opts.step_tol, opts.max_iters};
  auto out = detail::minimize_newton(obj, start_from(start_residual), nopts);
  int iterations = out.iterations;

  // Newton crawls when q < 2 and some d_t vanish at the solution (the Hessian
  // of |d|^q blows up there). Restart from the convex solver's residual.
  if (detail::system_violation(basis, obj.coefficients(out.x)) > opts.system_tol) {
    const auto cv = solve_convex(f, n, sp, opts);
    auto retry = detail::minimize_newton(obj, start_from(cv.residual), nopts);
    iterations += cv.iterations + retry.iterations;
    if (detail::system_violation(basis, obj.coefficients(retry.x)) <
        detail::system_violation(basis, obj.coefficients(out.x)))
      out = std::move(retry);
  }

  Eigen::VectorXcd scaled(static_cast<Eigen::Index>(basis.dim()));
  for (Eigen::Index k = 0; k < scaled.size(); ++k) scaled[k] = {out.x[2 * k], out.x[2 * k + 1]};

  const auto B = obj.coefficients(out.x);
  const double violation = detail::system_violation(basis, B);
  const Poly model_residual(B);

  StructuralSolution sol;
  sol.result.solver = "structural";
  sol.result.iterations = iterations;
  sol.result.gradient_sup = out.grad_sup;
  sol.result.converged = violation <= opts.system_tol;
  try {
    sol.result.approximant = exact_div(Poly::constant(1.0) - model_residual, f, std::max(kExactDivTol, 10.0 * violation));
  } catch (const InexactDivisionError& e) {
    throw ConsistencyError(std::string("structural solution is not of the form 1 - P f: ") + e.what());
  }
  finalize(sol.result, f, n, sp);
  sol.fit = detail::make_fit(basis, scaled, sol.result.residual, omega, p);
  sol.fit.system_residual = violation;
  return sol;
}

}  // namespace opa
