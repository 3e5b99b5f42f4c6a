#pragma once

/// @file composite.hpp
/// Near-optimal approximants built from Hilbert-space approximants to the
/// simple-zero part of f.

#include <cstddef>
#include <string>

#include "opa/error.hpp"
#include "opa/hilbert.hpp"

namespace opa {

/// sigma(n) = floor((n+d)/d_0) - m; negative when n is too small.
inline long composite_order(const CircleZeroSpec& spec, std::size_t n) {
  const auto d = static_cast<long>(spec.degree());
  const auto d0 = static_cast<long>(spec.max_multiplicity());
  const auto m = static_cast<long>(spec.distinct());
  return (static_cast<long>(n) + d) / d0 - m;
}

/// P_n = (q_sigma g)^{d_0} / f, where g = prod (z - z_i), d_0 is the largest
/// multiplicity and q_sigma is the order sigma(n) approximant to 1/g in
/// l^2 with weight (k+1)^{alpha/(p-1)}. deg P_n <= n.
inline Poly composite_construction(const CircleZeroSpec& spec, std::size_t n, const SpaceParams& sp) {
  spec.validate();
  const double p = sp.smooth_p();
  const auto alpha = sp.weight.alpha();
  if (!alpha) throw InapplicableError("composite construction needs a power weight (k+1)^alpha");
  const long sigma = composite_order(spec, n);
  if (sigma < 0) throw ArgumentError("n too small for the composite construction: sigma(n) < 0");

  const Poly f = expand(spec);
  const Poly g = expand(spec.simple_part());
  const Poly q = solve_hilbert(g, static_cast<std::size_t>(sigma), Weight::power(*alpha / (p - 1.0))).approximant;
  const Poly power = (q * g).pow(spec.max_multiplicity());
  try {
    return exact_div(power, f);
  } catch (const InexactDivisionError& e) {
    throw ConsistencyError(std::string("f does not divide (q g)^{d_0}: ") + e.what());
  }
}

}  // namespace opa
