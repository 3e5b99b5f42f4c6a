#pragma once

/// @file poly.hpp
/// Complex polynomial arithmetic, the signed power z^{<s>}, and polynomials
/// specified by their zeros on the unit circle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opa/error.hpp"

namespace opa {

using cplx = std::complex<double>;

/// Largest degree any arithmetic result may have.
inline constexpr std::size_t kMaxDegree = std::size_t{1} << 16;

/// z^{<s>} = r^s e^{-i theta} for z = r e^{i theta}, and 0 at z = 0.
///
/// Computed as conj(z) r^{s-1} with r = hypot(re, im); s = 1 is exact conjugation.
inline cplx signed_power(cplx z, double s) {
  if (s < 0.0) throw ArgumentError("signed_power needs s >= 0");
  if (z == cplx{}) return {};
  if (s == 1.0) return std::conj(z);
  const double r = std::hypot(z.real(), z.imag());
  return std::conj(z) * std::pow(r, s - 1.0);
}

/// Finite complex coefficient sequence, coefficient k multiplying z^k.
///
/// Trailing exact zeros are trimmed, so the zero polynomial has no coefficients.
class Poly {
 public:
  Poly() = default;
  Poly(std::initializer_list<cplx> c) : c_(c) { trim(); }
  explicit Poly(std::vector<cplx> c) : c_(std::move(c)) { trim(); }

  static Poly constant(cplx c) { return Poly({c}); }
  /// c z^k.
  static Poly monomial(std::size_t k, cplx c = 1.0) {
    if (k > kMaxDegree) throw ArgumentError("degree exceeds cap");
    std::vector<cplx> v(k + 1);
    v[k] = c;
    return Poly(std::move(v));
  }
  static Poly from_real(std::span<const double> c) { return Poly(std::vector<cplx>(c.begin(), c.end())); }

  /// Index of the last nonzero coefficient; nullopt for the zero polynomial.
  std::optional<std::size_t> degree() const {
    if (c_.empty()) return std::nullopt;
    return c_.size() - 1;
  }
  bool is_zero() const noexcept { return c_.empty(); }
  std::size_t size() const noexcept { return c_.size(); }

  /// Coefficient k, zero past the end.
  cplx operator[](std::size_t k) const { return k < c_.size() ? c_[k] : cplx{}; }
  std::span<const cplx> coeffs() const noexcept { return c_; }

  /// Horner evaluation.
  cplx operator()(cplx z) const {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// max_k |a_k|.
  double sup_norm() const {
    double m = 0.0;
    for (const auto& c : c_) m = std::max(m, std::abs(c));
    return m;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
    return Poly(std::move(d));
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<cplx> r(std::max(a.size(), b.size()));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[k] + b[k];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    std::vector<cplx> r(std::max(a.size(), b.size()));
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[k] - b[k];
    return Poly(std::move(r));
  }
  friend Poly operator-(const Poly& a) { return Poly{} - a; }

  /// Coefficient convolution.
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    const std::size_t n = a.size() + b.size() - 1;
    if (n - 1 > kMaxDegree) throw ArgumentError("product degree exceeds cap");
    std::vector<cplx> r(n);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(r));
  }
  friend Poly operator*(cplx s, const Poly& a) {
    std::vector<cplx> r(a.c_);
    for (auto& c : r) c *= s;
    return Poly(std::move(r));
  }

  friend bool operator==(const Poly&, const Poly&) = default;

  /// a^e by repeated squaring.
  Poly pow(unsigned e) const {
    Poly result = constant(1.0);
    Poly base = *this;
    while (e != 0) {
      if (e & 1U) result = result * base;
      e >>= 1U;
      if (e != 0) base = base * base;
    }
    return result;
  }

  /// P(z^d).
  Poly compose_power(std::size_t d) const {
    if (d == 0) throw ArgumentError("compose_power needs d >= 1");
    if (is_zero()) return {};
    if ((size() - 1) * d > kMaxDegree) throw ArgumentError("degree exceeds cap");
    std::vector<cplx> r((size() - 1) * d + 1);
    for (std::size_t k = 0; k < size(); ++k) r[k * d] = c_[k];
    return Poly(std::move(r));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
    if (!c_.empty() && c_.size() - 1 > kMaxDegree) throw ArgumentError("degree exceeds cap");
  }

  std::vector<cplx> c_;
};

inline Poly add(const Poly& a, const Poly& b) { return a + b; }
inline Poly sub(const Poly& a, const Poly& b) { return a - b; }
inline Poly mul(const Poly& a, const Poly& b) { return a * b; }

/// s-th derivative at z0 by Horner on the differentiated coefficients.
inline cplx eval_derivative(const Poly& a, cplx z0, unsigned s) {
  if (a.size() <= s) return {};
  // a^{(s)}(z) = sum_{k>=s} a_k k!/(k-s)! z^{k-s}
  cplx acc{};
  for (std::size_t k = a.size(); k-- > s;) {
    double falling = 1.0;
    for (unsigned i = 0; i < s; ++i) falling *= static_cast<double>(k - i);
    acc = acc * z0 + a[k] * falling;
  }
  return acc;
}

struct Division {
  Poly quotient;
  Poly remainder;
};

/// Long division num = quotient * den + remainder, deg remainder < deg den.
inline Division divide(const Poly& num, const Poly& den) {
  if (den.is_zero()) throw ArgumentError("division by the zero polynomial");
  const std::size_t dd = *den.degree();
  if (num.is_zero() || num.size() <= dd) return {Poly{}, num};
  std::vector<cplx> rem(num.coeffs().begin(), num.coeffs().end());
  std::vector<cplx> q(num.size() - dd);
  const cplx lead = den[dd];
  for (std::size_t k = q.size(); k-- > 0;) {
    const cplx c = rem[k + dd] / lead;
    q[k] = c;
    for (std::size_t j = 0; j <= dd; ++j) rem[k + j] -= c * den[j];
    rem[k + dd] = 0.0;
  }
  rem.resize(dd);
  return {Poly(std::move(q)), Poly(std::move(rem))};
}

/// Default relative remainder tolerance for exact_div.
inline constexpr double kExactDivTol = 1e-9;

/// Quotient of a division expected to be exact.
///
/// Throws InexactDivisionError when max|R| > tol * max|num|.
inline Poly exact_div(const Poly& num, const Poly& den, double tol = kExactDivTol) {
  auto [q, r] = divide(num, den);
  const double rn = r.sup_norm();
  const double scale = num.sup_norm();
  if (rn <= tol * scale) return q;
  // Long division amplifies rounding when den has zeros well outside the disc;
  // ascending division is the stable direction there.
  if (den[0] != cplx{} && num.size() >= den.size()) {
    std::vector<cplx> a(num.size() - den.size() + 1);
    for (std::size_t k = 0; k < a.size(); ++k) {
      cplx s = num[k];
      for (std::size_t j = 1; j <= k && j < den.size(); ++j) s -= den[j] * a[k - j];
      a[k] = s / den[0];
    }
    Poly qa(std::move(a));
    if ((num - qa * den).sup_norm() <= tol * scale) return qa;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", rn);
  throw InexactDivisionError(std::string("inexact polynomial division: remainder ") + buf, rn);
}

/// Angle in radians, optionally carried as an exact rational multiple of pi.
struct Angle {
  double radians = 0.0;
  /// (num, den) with angle = num/den * pi, den > 0.
  std::optional<std::pair<std::int64_t, std::int64_t>> pi_fraction;

  static Angle from_radians(double r) { return Angle{r, std::nullopt}; }
  static Angle pi_times(std::int64_t num, std::int64_t den) {
    if (den <= 0) throw ArgumentError("angle denominator must be positive");
    return Angle{std::numbers::pi * static_cast<double>(num) / static_cast<double>(den), {{num, den}}};
  }

  /// e^{i angle}; exact at multiples of pi/2 when given as a pi fraction.
  cplx unit_point() const {
    if (!pi_fraction) return std::polar(1.0, radians);
    auto [num, den] = *pi_fraction;
    // Reduce num/den mod 2 into [0, 2) and work in quarter turns of pi/2.
    const std::int64_t period = 2 * den;
    std::int64_t r = num % period;
    if (r < 0) r += period;
    // r/den in [0,2); quadrant = floor(2r/den), offset within quadrant.
    const std::int64_t twice = 2 * r;
    const std::int64_t quadrant = twice / den;
    const std::int64_t offset_num = twice - quadrant * den;  // angle = (quadrant + offset_num/den) * pi/2
    const double x = std::numbers::pi / 2 * static_cast<double>(offset_num) / static_cast<double>(den);
    const double c = offset_num == 0 ? 1.0 : std::cos(x);
    const double s = offset_num == 0 ? 0.0 : std::sin(x);
    switch (quadrant) {
      case 0: return {c, s};
      case 1: return {-s, c};
      case 2: return {-c, -s};
      default: return {s, -c};
    }
  }

  /// True when both describe the same point of the circle.
  bool same_point(const Angle& o) const {
    if (pi_fraction && o.pi_fraction) {
      // a/b - c/d in 2Z  <=>  (a d - c b) divisible by 2 b d
      const auto [a, b] = *pi_fraction;
      const auto [c, d] = *o.pi_fraction;
      return (a * d - c * b) % (2 * b * d) == 0;
    }
    return std::abs(unit_point() - o.unit_point()) < 1e-14;
  }
};

/// A zero e^{i theta} of multiplicity `mult`.
struct CircleRoot {
  Angle angle;
  unsigned mult = 1;
};

/// leading * prod_i (z - e^{i theta_i})^{b_i}.
struct CircleZeroSpec {
  std::vector<CircleRoot> roots;
  cplx leading = 1.0;

  std::size_t degree() const {
    std::size_t d = 0;
    for (const auto& r : roots) d += r.mult;
    return d;
  }
  std::size_t distinct() const noexcept { return roots.size(); }
  unsigned max_multiplicity() const {
    unsigned m = 0;
    for (const auto& r : roots) m = std::max(m, r.mult);
    return m;
  }
  std::vector<cplx> points() const {
    std::vector<cplx> z;
    z.reserve(roots.size());
    for (const auto& r : roots) z.push_back(r.angle.unit_point());
    return z;
  }

  void validate() const {
    if (roots.empty()) throw ArgumentError("circle zero spec has no roots");
    if (leading == cplx{}) throw ArgumentError("leading coefficient must be nonzero");
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (roots[i].mult == 0) throw ArgumentError("root multiplicity must be positive");
      for (std::size_t j = 0; j < i; ++j)
        if (roots[i].angle.same_point(roots[j].angle)) throw ArgumentError("duplicate root angle");
    }
  }

  /// The same zeros rescaled so that f(0) = 1.
  CircleZeroSpec normalized_at_origin() const {
    CircleZeroSpec s = *this;
    cplx at0 = 1.0;
    for (const auto& r : roots)
      for (unsigned k = 0; k < r.mult; ++k) at0 *= -r.angle.unit_point();
    s.leading = 1.0 / at0;
    return s;
  }

  /// Every zero with multiplicity one, leading coefficient one.
  CircleZeroSpec simple_part() const {
    CircleZeroSpec s;
    for (const auto& r : roots) s.roots.push_back({r.angle, 1});
    return s;
  }
};

/// Coefficients of leading * prod (z - e^{i theta_i})^{b_i}.
inline Poly expand(const CircleZeroSpec& spec) {
  spec.validate();
  Poly f = Poly::constant(spec.leading);
  for (const auto& r : spec.roots) {
    const Poly factor{-r.angle.unit_point(), 1.0};
    f = f * factor.pow(r.mult);
  }
  return f;
}

}  // namespace opa
