#pragma once

/// @file hilbert.hpp
/// Optimal approximants at p = 2 from the normal equations.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "opa/error.hpp"
#include "opa/result.hpp"

namespace opa {

/// Largest accepted condition estimate of the Gram matrix.
inline constexpr double kMaxGramCondition = 1e14;

namespace detail {

/// y = M^* W M x with M the convolution by f, W = diag(omega).
inline Eigen::VectorXcd gram_apply(const Poly& f, const std::vector<double>& w, const Eigen::VectorXcd& x) {
  const auto n1 = static_cast<std::size_t>(x.size());
  const std::size_t T = n1 + f.size() - 1;
  std::vector<cplx> mx(T);
  for (std::size_t k = 0; k < n1; ++k)
    for (std::size_t i = 0; i < f.size(); ++i) mx[k + i] += x[static_cast<Eigen::Index>(k)] * f[i];
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  for (std::size_t k = 0; k < n1; ++k) {
    cplx s{};
    for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * w[k + i] * mx[k + i];
    y[static_cast<Eigen::Index>(k)] = s;
  }
  return y;
}

}  // namespace detail

/// Solves <1 - p_n f, z^j f>_omega = 0, j = 0..n, the p = 2 case of the
/// orthogonality characterization.
///
/// Throws IllConditionedError when the Gram matrix condition estimate exceeds 1e14.
inline OpaResult solve_hilbert(const Poly& f, std::size_t n, const Weight& w) {
  detail::require_nonzero(f);
  detail::require_degree(n);
  const std::size_t d = *f.degree();
  const std::size_t N = n + 1;
  const std::size_t T = n + d + 1;
  std::vector<double> omega(T);
  for (std::size_t t = 0; t < T; ++t) omega[t] = w(t);

  // G_{jk} = sum_t omega_t conj(a_{t-j}) a_{t-k}; banded with half-width d.
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t k = j; k < N && k <= j + d; ++k) {
      cplx s{};
      for (std::size_t t = k; t <= j + d; ++t) s += omega[t] * std::conj(f[t - j]) * f[t - k];
      G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = s;
      G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = std::conj(s);
    }
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success)
    throw IllConditionedError("Gram matrix is not numerically positive definite", std::numeric_limits<double>::infinity());
  const double rcond = llt.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxGramCondition))
    throw IllConditionedError("Gram matrix condition estimate " + std::to_string(cond) + " exceeds 1e14", cond);

  // Right-hand side M^* W e_0 = conj(a_0) omega_0 e_0.
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N));
  b[0] = std::conj(f[0]) * omega[0];
  Eigen::VectorXcd c = llt.solve(b);
  // Iterative refinement against the convolution form of G.
  for (int step = 0; step < 3; ++step) {
    const Eigen::VectorXcd r = b - detail::gram_apply(f, omega, c);
    c += llt.solve(r);
  }

  OpaResult res;
  res.solver = "hilbert";
  res.approximant = Poly(std::vector<cplx>(c.data(), c.data() + c.size()));
  res.iterations = 1;
  res.converged = true;
  finalize(res, f, n, SpaceParams(Exponent::finite(2.0), w));
  return res;
}

}  // namespace opa
