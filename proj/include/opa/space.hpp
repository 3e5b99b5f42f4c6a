#pragma once

/// @file space.hpp
/// Norms and Birkhoff-James orthogonality in l^p_A(omega).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>

#include "opa/error.hpp"
#include "opa/poly.hpp"
#include "opa/weights.hpp"

namespace opa {

/// An exponent in [1, infinity]; infinity is a distinct state, never a large float.
class Exponent {
 public:
  static Exponent finite(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("exponent must be a finite number >= 1");
    return Exponent(p, false);
  }
  static Exponent infinity() { return Exponent(1.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  bool is_one() const noexcept { return !infinite_ && value_ == 1.0; }
  /// 1 < p < infinity.
  bool is_smooth() const noexcept { return !infinite_ && value_ > 1.0; }

  /// Numeric value; only meaningful when finite.
  double value() const {
    if (infinite_) throw UnsupportedExponentError("exponent is infinite");
    return value_;
  }

  /// Hoelder conjugate: p/(p-1), with 1 <-> infinity.
  Exponent conjugate() const {
    if (infinite_) return finite(1.0);
    if (value_ == 1.0) return infinity();
    return finite(value_ / (value_ - 1.0));
  }

  /// 1/p, zero at infinity.
  double reciprocal() const noexcept { return infinite_ ? 0.0 : 1.0 / value_; }

  std::string to_string() const {
    if (infinite_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  Exponent(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Exponent p, its conjugate q and the weight omega.
struct SpaceParams {
  Exponent p;
  Exponent q;
  Weight weight;

  SpaceParams(Exponent p_, Weight w) : p(p_), q(p_.conjugate()), weight(std::move(w)) {}
  static SpaceParams power(double p, double alpha) { return {Exponent::finite(p), Weight::power(alpha)}; }
  static SpaceParams power_inf(double alpha) { return {Exponent::infinity(), Weight::power(alpha)}; }

  /// p as a double, throwing unless 1 < p < infinity.
  double smooth_p() const {
    if (!p.is_smooth()) throw UnsupportedExponentError("operation requires 1 < p < infinity");
    return p.value();
  }
};

/// ||g||_{p,omega}.
inline double norm(const Poly& g, const SpaceParams& sp) {
  const auto c = g.coeffs();
  if (sp.p.is_infinite()) {
    double m = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) m = std::max(m, std::abs(c[k]) * sp.weight(k));
    return m;
  }
  const double p = sp.p.value();
  // Scale by the largest entry so |a|^p does not under/overflow.
  double scale = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    scale = std::max(scale, std::abs(c[k]) * std::pow(sp.weight(k), 1.0 / p));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = std::abs(c[k]);
    if (a != 0.0) s += std::pow(a / scale, p) * sp.weight(k);
  }
  return scale * std::pow(s, 1.0 / p);
}

/// ||g||_{p,omega}^p for finite p; the sup norm itself when p is infinite.
inline double norm_power(const Poly& g, const SpaceParams& sp) {
  if (sp.p.is_infinite()) return norm(g, sp);
  const double p = sp.p.value();
  const auto c = g.coeffs();
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = std::abs(c[k]);
    if (a != 0.0) s += std::pow(a, p) * sp.weight(k);
  }
  return s;
}

/// Wiener norm sum |a_k|.
inline double wiener_norm(const Poly& g) {
  double s = 0.0;
  for (const auto& c : g.coeffs()) s += std::abs(c);
  return s;
}

/// sum_n f(n)^{<p-1>} g(n) omega_n; zero iff f is Birkhoff-James orthogonal to g.
inline cplx bj_residual(const Poly& f, const Poly& g, const SpaceParams& sp) {
  const double p = sp.smooth_p();
  const std::size_t n = std::min(f.size(), g.size());
  cplx s{};
  for (std::size_t k = 0; k < n; ++k) s += signed_power(f[k], p - 1.0) * g[k] * sp.weight(k);
  return s;
}

/// bj_residual with f and g both rescaled to unit norm (0 if either is zero).
inline cplx bj_residual_normalized(const Poly& f, const Poly& g, const SpaceParams& sp) {
  const double p = sp.smooth_p();
  const double nf = norm(f, sp);
  const double ng = norm(g, sp);
  if (nf == 0.0 || ng == 0.0) return {};
  return bj_residual(f, g, sp) / (std::pow(nf, p - 1.0) * ng);
}

inline constexpr double kBjTol = 1e-8;

/// f perp_{p,omega} g, judged on the normalized residual.
inline bool bj_orthogonal(const Poly& f, const Poly& g, const SpaceParams& sp, double tol = kBjTol) {
  return std::abs(bj_residual_normalized(f, g, sp)) <= tol;
}

/// h(r) = sum_n omega_n^{-1/p} r^n, so that |f(z0)| <= ||f|| h(|z0|).
inline double evaluation_bound(const SpaceParams& sp, double r) {
  if (!(r >= 0.0) || !(r < 1.0)) throw ArgumentError("evaluation_bound needs 0 <= r < 1");
  if (r == 0.0) return 1.0;
  // omega^{-1/p}; exponent -1 for p = infinity.
  const double e = sp.p.is_infinite() ? -1.0 : -1.0 / sp.p.value();
  const auto term_weight = [&](std::size_t n) { return std::pow(sp.weight(n), e); };
  double sum = 0.0;
  double rn = 1.0;
  constexpr std::size_t kMaxTerms = 50'000'000;
  for (std::size_t n = 0; n < kMaxTerms; ++n) {
    const double term = term_weight(n) * rn;
    sum += term;
    const double next = term_weight(n + 1) * rn * r;
    // Geometric tail bound using the larger of the current ratio and r.
    const double ratio = std::max(term > 0.0 ? next / term : r, r);
    if (ratio < 1.0 && next / (1.0 - ratio) < 1e-15 * sum) return sum + next;
    rn *= r;
  }
  return sum;
}

/// ceil(k/2): the splitting index where k/2 means floor(k/2)+1 for odd k.
constexpr std::size_t half_index(std::size_t k) noexcept { return k % 2 == 0 ? k / 2 : k / 2 + 1; }

struct MultiplicationBound {
  double lhs;       ///< ||fg||_{p,omega}
  double rhs;       ///< C_{p,omega} (||f||_1 ||g|| + ||f|| ||g||_1)
  double constant;  ///< C_{p,omega}
  bool holds;
};

/// Constant of the product estimate: C_omega^{1/p}, and C_omega itself for p = infinity.
inline double multiplication_constant(const SpaceParams& sp) {
  const double c = sp.weight.doubling_constant();
  if (sp.p.is_infinite()) return c;
  return std::pow(c, 1.0 / sp.p.value());
}

/// ||fg|| <= C (||f||_1 ||g|| + ||f|| ||g||_1).
inline MultiplicationBound multiplication_bound_check(const Poly& f, const Poly& g, const SpaceParams& sp) {
  MultiplicationBound b{};
  b.constant = multiplication_constant(sp);
  b.lhs = norm(f * g, sp);
  b.rhs = b.constant * (wiener_norm(f) * norm(g, sp) + norm(f, sp) * wiener_norm(g));
  // Rounding slack on the comparison only.
  b.holds = b.lhs <= b.rhs * (1.0 + 1e-12);
  return b;
}

/// The isometry onto unweighted l^p: coefficient n scaled by omega_n^{1/p}.
inline Poly isometry_to_unweighted(const Poly& g, const SpaceParams& sp) {
  const double e = sp.p.is_infinite() ? 1.0 : 1.0 / sp.p.value();
  std::vector<cplx> c(g.coeffs().begin(), g.coeffs().end());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::pow(sp.weight(k), e);
  return Poly(std::move(c));
}

}  // namespace opa
