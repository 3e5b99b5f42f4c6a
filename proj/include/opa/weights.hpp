#pragma once

/// @file weights.hpp
/// Admissible weight sequences omega_k for the spaces l^p_A(omega).
///
/// A weight is a positive sequence with omega_0 = 1 satisfying a doubling
/// condition C^{-1} omega_k <= omega_{k+t} <= C omega_k (0 <= t <= k+1) and
/// omega_{k+1}/omega_k -> 1. The power family omega_k = (k+1)^alpha has the
/// closed-form constant C = 2^{|alpha|}; table weights are checked by sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opa/error.hpp"

namespace opa {

/// Default sampling horizon for admissibility checks.
inline constexpr std::size_t kDefaultKTest = 4096;

class Weight {
 public:
  /// How a table weight is extended past its explicit values.
  enum class Tail { constant, power };

  /// omega_k = (k+1)^alpha.
  static Weight power(double alpha) {
    if (!std::isfinite(alpha)) throw ArgumentError("weight exponent must be finite");
    Weight w;
    w.rep_ = PowerRep{alpha};
    w.doubling_ = std::exp2(std::abs(alpha));
    return w;
  }

  /// Explicit values omega_0..omega_{K-1}, extended by `tail`.
  ///
  /// When `declared_doubling` is given it must hold on the sampled range,
  /// otherwise the sampled maximum ratio is used as the doubling constant.
  static Weight table(std::vector<double> values, Tail tail,
                      std::optional<double> declared_doubling = std::nullopt,
                      std::size_t k_test = kDefaultKTest) {
    if (values.empty()) throw AdmissibilityError("table weight needs at least omega_0");
    if (values.front() != 1.0) throw AdmissibilityError("table weight must have omega_0 = 1");
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!(values[k] > 0.0) || !std::isfinite(values[k]))
        throw AdmissibilityError("table weight value at k=" + std::to_string(k) +
                                 " is not a positive finite number");
    }
    TableRep rep{std::move(values), tail, 0.0};
    const std::size_t size = rep.values.size();
    if (tail == Tail::power && size >= 2) {
      const double last = rep.values[size - 1];
      const double prev = rep.values[size - 2];
      rep.tail_exponent = std::log(last / prev) /
                          std::log(static_cast<double>(size) / static_cast<double>(size - 1));
    }
    Weight w;
    w.rep_ = std::move(rep);
    const std::size_t horizon = std::max(k_test, 2 * size);
    const double sampled = w.sampled_doubling(horizon);
    if (declared_doubling) {
      if (!(*declared_doubling >= 1.0))
        throw AdmissibilityError("declared doubling constant must be >= 1");
      if (sampled > *declared_doubling * (1.0 + 1e-12))
        throw AdmissibilityError("table weight violates the doubling condition with C = " +
                                 std::to_string(*declared_doubling) + " (sampled ratio " +
                                 std::to_string(sampled) + ")");
      w.doubling_ = *declared_doubling;
    } else {
      w.doubling_ = sampled;
    }
    return w;
  }

  /// omega_k.
  double operator()(std::size_t k) const {
    return std::visit([k](const auto& rep) { return value(rep, k); }, rep_);
  }

  double doubling_constant() const noexcept { return doubling_; }

  /// The exponent alpha when this is a power weight, nullopt otherwise.
  std::optional<double> alpha() const {
    if (const auto* p = std::get_if<PowerRep>(&rep_)) return p->alpha;
    return std::nullopt;
  }

  bool is_power() const noexcept { return std::holds_alternative<PowerRep>(rep_); }

  bool is_trivial() const noexcept {
    const auto* p = std::get_if<PowerRep>(&rep_);
    return p != nullptr && p->alpha == 0.0;
  }

  /// omega~_t = omega_{d t}.
  Weight dilate(std::size_t d) const {
    if (d == 0) throw ArgumentError("dilation factor must be >= 1");
    if (d == 1) return *this;
    Weight w;
    if (const auto* inner = std::get_if<DilatedRep>(&rep_)) {
      w.rep_ = DilatedRep{inner->base, inner->factor * d};
    } else {
      w.rep_ = DilatedRep{std::make_shared<const Weight>(*this), d};
    }
    if (const auto a = base_alpha(w)) {
      // Worst ratio sits at k = 0, t = 1: omega_d / omega_0 = (d+1)^alpha.
      const auto factor = std::get<DilatedRep>(w.rep_).factor;
      w.doubling_ = std::pow(static_cast<double>(factor + 1), std::abs(*a));
    } else {
      w.doubling_ = w.sampled_doubling(kDefaultKTest);
    }
    return w;
  }

  /// max over k < horizon, 0 <= t <= k+1 of max(omega_{k+t}/omega_k, omega_k/omega_{k+t}).
  double sampled_doubling(std::size_t horizon) const {
    std::vector<double> v(2 * horizon + 2);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = (*this)(k);
    double worst = 1.0;
    for (std::size_t k = 0; k < horizon; ++k) {
      double lo = v[k], hi = v[k];
      for (std::size_t t = 1; t <= k + 1; ++t) {
        lo = std::min(lo, v[k + t]);
        hi = std::max(hi, v[k + t]);
      }
      worst = std::max({worst, hi / v[k], v[k] / lo});
    }
    return worst;
  }

  std::string describe() const {
    struct Visitor {
      std::string operator()(const PowerRep& p) const { return "power(alpha=" + fmt(p.alpha) + ")"; }
      std::string operator()(const TableRep& t) const {
        return "table(" + std::to_string(t.values.size()) + " values, " +
               (t.tail == Tail::power ? "power" : "constant") + " tail)";
      }
      std::string operator()(const DilatedRep& d) const {
        return "dilate(" + d.base->describe() + ", " + std::to_string(d.factor) + ")";
      }
      static std::string fmt(double x) {
        std::string s = std::to_string(x);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
      }
    };
    return std::visit(Visitor{}, rep_);
  }

 private:
  struct PowerRep {
    double alpha;
  };
  struct TableRep {
    std::vector<double> values;
    Tail tail;
    double tail_exponent;
  };
  struct DilatedRep {
    std::shared_ptr<const Weight> base;
    std::size_t factor;
  };

  Weight() = default;

  static double value(const PowerRep& p, std::size_t k) {
    if (p.alpha == 0.0) return 1.0;
    return std::pow(static_cast<double>(k) + 1.0, p.alpha);
  }
  static double value(const TableRep& t, std::size_t k) {
    if (k < t.values.size()) return t.values[k];
    const double last = t.values.back();
    if (t.tail == Tail::constant || t.tail_exponent == 0.0) return last;
    const double size = static_cast<double>(t.values.size());
    return last * std::pow((static_cast<double>(k) + 1.0) / size, t.tail_exponent);
  }
  static double value(const DilatedRep& d, std::size_t k) { return (*d.base)(k * d.factor); }

  static std::optional<double> base_alpha(const Weight& w) {
    if (const auto* d = std::get_if<DilatedRep>(&w.rep_)) return d->base->alpha();
    return w.alpha();
  }

  std::variant<PowerRep, TableRep, DilatedRep> rep_{PowerRep{0.0}};
  double doubling_ = 1.0;
};

/// omega_k.
inline double weight_at(const Weight& w, std::size_t k) { return w(k); }

/// A valid C for the doubling condition; 2^{|alpha|} for power weights.
inline double doubling_constant_for(const Weight& w) { return w.doubling_constant(); }

/// omega~_t = omega_{d t}.
inline Weight dilate(const Weight& w, std::size_t d) { return w.dilate(d); }

/// Result of sampling both admissibility conditions.
struct AdmissibilityReport {
  double doubling_witness;   ///< sampled max ratio over the doubling windows
  double ratio_deviation;    ///< |omega_{K+1}/omega_K - 1| at K = k_test
  double ratio_deviation_half;  ///< same at K = k_test / 2
  bool doubling_ok;
  bool ratio_ok;
  bool admissible() const { return doubling_ok && ratio_ok; }
};

/// Samples the doubling and ratio conditions up to `k_test`.
///
/// The ratio condition is a limit, so it is judged by the deviation at k_test
/// being below `ratio_tol` and not larger than at k_test/2.
inline AdmissibilityReport check_admissibility(const Weight& w, std::size_t k_test = kDefaultKTest,
                                               double ratio_tol = 1e-2) {
  if (k_test < 2) throw ArgumentError("k_test must be >= 2");
  AdmissibilityReport r{};
  r.doubling_witness = w.sampled_doubling(k_test);
  r.doubling_ok = r.doubling_witness <= w.doubling_constant() * (1.0 + 1e-12);
  const auto dev = [&](std::size_t k) { return std::abs(w(k + 1) / w(k) - 1.0); };
  r.ratio_deviation = dev(k_test);
  r.ratio_deviation_half = dev(k_test / 2);
  r.ratio_ok = std::isfinite(r.ratio_deviation) && r.ratio_deviation <= ratio_tol &&
               r.ratio_deviation <= r.ratio_deviation_half * (1.0 + 1e-12) + 1e-15;
  return r;
}

}  // namespace opa
