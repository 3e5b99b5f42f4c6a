#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "opa/space.hpp"
#include "oracles.hpp"

using opa::cplx;
using opa::Exponent;
using opa::Poly;
using opa::SpaceParams;
using opa::Weight;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Poly random_poly(std::mt19937_64& rng, std::size_t deg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> c(deg + 1);
  for (auto& x : c) x = {u(rng), u(rng)};
  return Poly(std::move(c));
}

SpaceParams space(double p, double alpha) {
  return std::isinf(p) ? SpaceParams::power_inf(alpha) : SpaceParams::power(p, alpha);
}

}  // namespace

TEST(Exponent, Conjugates) {
  EXPECT_TRUE(Exponent::finite(1.0).conjugate().is_infinite());
  EXPECT_EQ(Exponent::infinity().conjugate().value(), 1.0);
  EXPECT_DOUBLE_EQ(Exponent::finite(3.0).conjugate().value(), 1.5);
  for (double p : {1.0, 1.3, 2.0, 7.0}) {
    const Exponent e = Exponent::finite(p);
    EXPECT_NEAR(e.reciprocal() + e.conjugate().reciprocal(), 1.0, 1e-15);
  }
  EXPECT_EQ(Exponent::infinity().reciprocal() + Exponent::finite(1.0).reciprocal(), 1.0);
  EXPECT_THROW(Exponent::finite(0.5), opa::ArgumentError);
  EXPECT_THROW(Exponent::finite(INFINITY), opa::ArgumentError);
  EXPECT_THROW(Exponent::infinity().value(), opa::UnsupportedExponentError);
}

TEST(Norm, Examples) {
  EXPECT_NEAR(opa::norm(Poly{1.0, -1.0}, space(2, 0)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(opa::norm(Poly{1.0, -1.0}, space(1, 1)), 3.0, 1e-15);
  EXPECT_NEAR(opa::norm(Poly{1.0, 1.0, 1.0}, space(kInf, 1)), 3.0, 1e-15);
  EXPECT_EQ(opa::norm(Poly{}, space(3, 1)), 0.0);
}

TEST(Norm, MatchesLongDoubleSum) {
  std::mt19937_64 rng(1);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (double a : {-1.0, 0.0, 1.0}) {
      const Poly g = random_poly(rng, 12);
      const oracle::Coeffs c(g.coeffs().begin(), g.coeffs().end());
      const double want = oracle::lp_norm(c, p, oracle::power_weights(c.size(), a));
      EXPECT_NEAR(opa::norm(g, space(p, a)) / want, 1.0, 1e-13);
      EXPECT_NEAR(opa::norm_power(g, space(p, a)) / std::pow(want, p), 1.0, 1e-13);
    }
  }
}

TEST(Norm, ExtremeScalesDoNotOverflow) {
  const Poly tiny{1e-200, 1e-200};
  EXPECT_NEAR(opa::norm(tiny, space(3, 0)) / (1e-200 * std::cbrt(2.0)), 1.0, 1e-14);
}

TEST(Norm, HomogeneityAndTriangle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    for (double a : {-1.0, 0.0, 1.0}) {
      const SpaceParams sp = space(p, a);
      for (int i = 0; i < 100; ++i) {
        const Poly f = random_poly(rng, i % 11), g = random_poly(rng, (i * 7) % 13);
        const cplx lam{u(rng), u(rng)};
        const double nf = opa::norm(f, sp);
        EXPECT_NEAR(opa::norm(lam * f, sp), std::abs(lam) * nf, 1e-10 * std::abs(lam) * nf);
        EXPECT_LE(opa::norm(f + g, sp), (opa::norm(f, sp) + opa::norm(g, sp)) * (1 + 1e-10));
      }
    }
  }
}

TEST(Wiener, Examples) {
  EXPECT_DOUBLE_EQ(opa::wiener_norm(Poly{1.0, -2.0, 1.0}), 4.0);
  EXPECT_EQ(opa::wiener_norm(Poly{}), 0.0);
  for (std::size_t d : {1u, 2u, 5u}) EXPECT_EQ(opa::wiener_norm(Poly::constant(1.0) - Poly::monomial(d)), 2.0);
}

TEST(BjResidual, Examples) {
  EXPECT_EQ(opa::bj_residual(Poly{1.0, 2.0}, Poly{}, space(3, 1)), cplx{});
  for (double p : {1.5, 2.0, 4.0})
    for (double a : {-1.0, 0.0, 2.0}) EXPECT_EQ(opa::bj_residual(Poly::monomial(1), Poly::constant(1.0), space(p, a)), cplx{});
  EXPECT_EQ(opa::bj_residual(Poly{1.0, -1.0}, Poly::constant(1.0), space(2, 0)), cplx{1.0});
}

TEST(BjResidual, EqualsInnerProductAtTwo) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Poly f = random_poly(rng, 6), g = random_poly(rng, 6);
    cplx ip{};
    for (std::size_t k = 0; k < 7; ++k) ip += std::conj(f[k]) * g[k] * static_cast<double>(k + 1);
    EXPECT_LE(std::abs(opa::bj_residual(f, g, space(2, 1)) - ip), 1e-13);
  }
}

TEST(BjResidual, RejectsFlatExponents) {
  EXPECT_THROW(opa::bj_residual(Poly{1.0}, Poly{1.0}, space(1, 0)), opa::UnsupportedExponentError);
  EXPECT_THROW(opa::bj_residual(Poly{1.0}, Poly{1.0}, space(kInf, 0)), opa::UnsupportedExponentError);
}

TEST(BjResidual, LinearInSecondArgument) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const SpaceParams sp = space(p, 0.5);
    for (int i = 0; i < 100; ++i) {
      const Poly f = random_poly(rng, 8), g1 = random_poly(rng, 8), g2 = random_poly(rng, 5);
      const cplx lam{u(rng), u(rng)};
      const cplx lhs = opa::bj_residual(f, g1 + lam * g2, sp);
      const cplx rhs = opa::bj_residual(f, g1, sp) + lam * opa::bj_residual(f, g2, sp);
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(BjResidual, OrthogonalityImpliesNormInequality) {
  // Make f orthogonal to g by removing the component along g.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const SpaceParams sp = space(p, 0.0);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
      // Disjoint supports give exact orthogonality.
      const Poly f = random_poly(rng, 3);
      const Poly g = Poly::monomial(4) * random_poly(rng, 3);
      ASSERT_LE(std::abs(opa::bj_residual(f, g, sp)), 1e-10);
      const double nf = opa::norm(f, sp);
      for (int j = 0; j < 100; ++j) {
        cplx lam{u(rng), u(rng)};
        if (std::abs(lam) > 1.0) lam /= std::abs(lam);
        EXPECT_GE(opa::norm(f + lam * g, sp), nf - 1e-8);
      }
      ++checked;
    }
    EXPECT_EQ(checked, 40);
  }
}

TEST(EvaluationBound, Examples) {
  EXPECT_EQ(opa::evaluation_bound(space(2, 0), 0.0), 1.0);
  for (double p : {1.0, 2.0, 5.0, kInf}) EXPECT_NEAR(opa::evaluation_bound(space(p, 0), 0.5), 2.0, 1e-14);
  EXPECT_NEAR(opa::evaluation_bound(space(2, 2), 0.5), 2.0 * std::log(2.0), 1e-14);
  EXPECT_THROW(opa::evaluation_bound(space(2, 0), 1.0), opa::ArgumentError);
  EXPECT_THROW(opa::evaluation_bound(space(2, 0), -0.1), opa::ArgumentError);
}

TEST(EvaluationBound, BoundsPointEvaluation) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> th(0.0, 2 * std::numbers::pi);
  for (double p : {1.0, 2.0, 3.0, kInf}) {
    for (double a : {-1.0, 0.0, 2.0}) {
      const SpaceParams sp = space(p, a);
      for (int i = 0; i < 50; ++i) {
        const Poly f = random_poly(rng, 10);
        const double r = 0.95 * (i % 10) / 10.0;
        const cplx z = std::polar(r, th(rng));
        EXPECT_LE(std::abs(f(z)), opa::norm(f, sp) * opa::evaluation_bound(sp, r) * (1 + 1e-12));
      }
    }
  }
}

TEST(Multiplication, Examples) {
  std::mt19937_64 rng(10);
  const Poly g = random_poly(rng, 5);
  EXPECT_TRUE(opa::multiplication_bound_check(Poly::constant(1.0), g, space(3, 1)).holds);
  const auto m = opa::multiplication_bound_check(Poly{1.0, -1.0}, Poly{1.0, -1.0}, space(2, 0));
  EXPECT_NEAR(m.lhs, std::sqrt(6.0), 1e-15);
  // C = 1 for the unweighted space: rhs = 1 * (2 sqrt2 + sqrt2 2).
  EXPECT_EQ(m.constant, 1.0);
  EXPECT_NEAR(m.rhs, 4.0 * std::sqrt(2.0), 1e-14);
  EXPECT_TRUE(m.holds);
  const auto z = opa::multiplication_bound_check(Poly{}, g, space(2, 1));
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_TRUE(z.holds);
}

TEST(Multiplication, ConstantFromDoubling) {
  EXPECT_NEAR(opa::multiplication_constant(space(2, 1)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(opa::multiplication_constant(space(1, -1)), 2.0, 1e-15);
  EXPECT_NEAR(opa::multiplication_constant(space(kInf, 1)), 2.0, 1e-15);
  EXPECT_EQ(opa::multiplication_constant(space(3, 0)), 1.0);
}

TEST(Multiplication, HoldsOnRandomPairs) {
  std::mt19937_64 rng(12);
  for (double p : {1.0, 1.5, 2.0, kInf}) {
    for (double a : {-1.0, 0.0, 1.0}) {
      const SpaceParams sp = space(p, a);
      for (int i = 0; i < 1000; ++i) {
        const Poly f = random_poly(rng, i % 9), g = random_poly(rng, (i / 9) % 9);
        EXPECT_TRUE(opa::multiplication_bound_check(f, g, sp).holds) << p << " " << a << " " << i;
      }
    }
  }
}

TEST(Isometry, PreservesNorm) {
  std::mt19937_64 rng(14);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    for (double a : {-1.0, 0.5, 2.0}) {
      const SpaceParams sp = space(p, a);
      const SpaceParams flat = space(p, 0.0);
      for (int i = 0; i < 20; ++i) {
        const Poly f = random_poly(rng, 15);
        EXPECT_NEAR(opa::norm(opa::isometry_to_unweighted(f, sp), flat) / opa::norm(f, sp), 1.0, 1e-12);
      }
    }
  }
}

TEST(HalfIndex, Convention) {
  EXPECT_EQ(opa::half_index(0), 0u);
  EXPECT_EQ(opa::half_index(4), 2u);
  EXPECT_EQ(opa::half_index(5), 3u);
  EXPECT_EQ(opa::half_index(1), 1u);
}
