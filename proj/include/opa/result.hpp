#pragma once

/// @file result.hpp
/// Result and option types shared by the approximant solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "opa/poly.hpp"
#include "opa/space.hpp"

namespace opa {

struct SolverOpts {
  double grad_tol = 1e-10;    ///< sup-norm of the objective gradient
  double step_tol = 1e-10;    ///< Newton step, relative to max(1, |x|)
  double system_tol = 1e-9;   ///< structural system violation
  double flat_tol = 1e-6;     ///< duality gap for p in {1, inf}
  int max_iters = 10000;
  int flat_max_iters = 2'000'000;
};

/// An optimal polynomial approximant p_n to 1/f and its diagnostics.
struct OpaResult {
  Poly approximant;                 ///< p_n, degree <= n
  Poly residual;                    ///< 1 - p_n f
  double optimal_norm = 0.0;        ///< ||1 - p_n f||_{p,omega}
  double ortho_residual_max = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  std::string solver;
  double gradient_sup = 0.0;
};

/// 1 - P f.
inline Poly one_minus(const Poly& P, const Poly& f) { return Poly::constant(1.0) - P * f; }

/// max_{j <= n} |bj_residual(residual, z^j f)| after normalizing both to unit norm.
inline double ortho_residual_max(const Poly& residual, const Poly& f, std::size_t n, const SpaceParams& sp) {
  if (!sp.p.is_smooth()) return std::numeric_limits<double>::quiet_NaN();
  const double p = sp.p.value();
  const double nr = norm(residual, sp);
  if (nr == 0.0) return 0.0;
  // s_t = residual_t^{<p-1>} omega_t, scaled by the residual norm
  std::vector<cplx> s(residual.size());
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = signed_power(residual[t] / nr, p - 1.0) * sp.weight(t);
  const double fs = f.sup_norm();
  if (fs == 0.0) return 0.0;
  double m = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    double ng = 0.0;  // ||z^j f|| / sup|f|
    for (std::size_t i = 0; i < f.size(); ++i) ng += std::pow(std::abs(f[i]) / fs, p) * sp.weight(i + j);
    ng = fs * std::pow(ng, 1.0 / p);
    cplx acc{};
    for (std::size_t i = 0; i < f.size() && i + j < s.size(); ++i) acc += s[i + j] * f[i];
    m = std::max(m, std::abs(acc) / ng);
  }
  return m;
}

/// Fills residual, norm and orthogonality diagnostics from the approximant.
inline void finalize(OpaResult& r, const Poly& f, std::size_t n, const SpaceParams& sp) {
  r.residual = one_minus(r.approximant, f);
  r.optimal_norm = norm(r.residual, sp);
  r.ortho_residual_max = ortho_residual_max(r.residual, f, n, sp);
}

namespace detail {

inline void require_nonzero(const Poly& f) {
  if (f.is_zero()) throw ArgumentError("f must not be the zero polynomial");
}

inline void require_degree(std::size_t n) {
  if (n > kMaxDegree) throw ArgumentError("approximant degree exceeds cap");
}

}  // namespace detail

}  // namespace opa
