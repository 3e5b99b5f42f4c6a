#pragma once

/// @file closed_form.hpp
/// Explicit optimal approximants to 1/(1 - z^d).
///
/// With delta_k^q = sum_{t<=k} omega_t^{-q/p}, the approximant to 1/(1 - z)
/// of order n is p_n(z) = sum_{t<=n} (1 - delta_t^q / delta_{n+1}^q) z^t and
/// ||1 - (1 - z) p_n||^p = delta_{n+1}^{-p}. For 1 - z^d the approximant is
/// Q(z^d) with Q the order floor(n/d) approximant to 1/(1 - z) for the
/// dilated weight omega~_t = omega_{d t}.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "opa/error.hpp"
#include "opa/result.hpp"

namespace opa {

namespace detail {

/// Running sums delta_k^q = sum_{t <= k} omega_t^{-q/p}, k = 0..kmax.
inline std::vector<double> dual_weight_sums(const Weight& w, double p, std::size_t kmax) {
  const double e = -1.0 / (p - 1.0);  // -q/p
  std::vector<double> s(kmax + 1);
  double acc = 0.0;
  for (std::size_t t = 0; t <= kmax; ++t) {
    acc += std::pow(w(t), e);
    s[t] = acc;
  }
  return s;
}

}  // namespace detail

/// 1 - z^d.
inline Poly one_minus_zd(std::size_t d) {
  if (d == 0) throw ArgumentError("d must be >= 1");
  return Poly::constant(1.0) - Poly::monomial(d);
}

/// delta~_{floor(n/d)+1}^{-p}, the optimal ||1 - (1 - z^d) p_n||^p.
inline double closed_form_norm_power(std::size_t d, std::size_t n, const SpaceParams& sp) {
  if (d == 0) throw ArgumentError("d must be >= 1");
  const double p = sp.smooth_p();
  const std::size_t order = n / d;
  const auto sums = detail::dual_weight_sums(sp.weight.dilate(d), p, order + 1);
  const double q = p / (p - 1.0);
  return std::pow(sums[order + 1], -p / q);
}

/// The optimal approximant to 1/(1 - z^d) of order n.
inline OpaResult closed_form_one_minus_zd(std::size_t d, std::size_t n, const SpaceParams& sp) {
  if (d == 0) throw ArgumentError("d must be >= 1");
  detail::require_degree(n);
  const double p = sp.smooth_p();
  const std::size_t order = n / d;
  const auto sums = detail::dual_weight_sums(sp.weight.dilate(d), p, order + 1);
  std::vector<cplx> q(order + 1);
  for (std::size_t t = 0; t <= order; ++t) q[t] = 1.0 - sums[t] / sums[order + 1];

  OpaResult res;
  res.solver = "closed";
  res.approximant = Poly(std::move(q)).compose_power(d);
  res.iterations = 0;
  res.converged = true;
  finalize(res, one_minus_zd(d), n, sp);
  return res;
}

/// True when f is exactly 1 - z^d for some d >= 1; returns that d.
inline std::optional<std::size_t> match_one_minus_zd(const Poly& f) {
  if (f.size() < 2 || f[0] != cplx{1.0} || f[f.size() - 1] != cplx{-1.0}) return std::nullopt;
  for (std::size_t k = 1; k + 1 < f.size(); ++k)
    if (f[k] != cplx{}) return std::nullopt;
  return f.size() - 1;
}

}  // namespace opa
