#include <gtest/gtest.h>

#include <cmath>

#include "opa/weights.hpp"
#include "oracles.hpp"

using opa::Weight;

TEST(WeightAt, PowerValues) {
  EXPECT_EQ(opa::weight_at(Weight::power(0.0), 17), 1.0);
  EXPECT_EQ(opa::weight_at(Weight::power(1.0), 3), 4.0);
  EXPECT_EQ(opa::weight_at(Weight::power(-1.0), 3), 0.25);
}

TEST(WeightAt, OmegaZeroIsOne) {
  for (double a : {-3.0, -0.5, 0.0, 0.7, 2.0}) EXPECT_EQ(Weight::power(a)(0), 1.0);
}

TEST(WeightAt, PowerIsFloatingEvaluationOfExpression) {
  const Weight w = Weight::power(0.37);
  for (std::size_t k : {0u, 1u, 9u, 1000u}) EXPECT_EQ(w(k), std::pow(static_cast<double>(k + 1), 0.37));
}

TEST(Doubling, PowerConstants) {
  EXPECT_EQ(opa::doubling_constant_for(Weight::power(0.0)), 1.0);
  EXPECT_EQ(opa::doubling_constant_for(Weight::power(1.0)), 2.0);
  EXPECT_EQ(opa::doubling_constant_for(Weight::power(-2.0)), 4.0);
}

TEST(Doubling, BruteForceMatchesNegativeTwo) {
  const Weight w = Weight::power(-2.0);
  const double brute = oracle::brute_doubling([&](std::size_t k) { return w(k); }, 10000);
  EXPECT_NEAR(brute, 4.0, 1e-3);
  EXPECT_LE(brute, w.doubling_constant() * (1 + 1e-12));
}

TEST(Doubling, SampledInequalityHoldsForPowerWeights) {
  for (double a : {-2.5, -1.0, -0.3, 0.0, 0.5, 1.0, 3.0}) {
    const Weight w = Weight::power(a);
    const double C = w.doubling_constant();
    for (std::size_t k = 0; k <= 300; ++k)
      for (std::size_t t = 0; t <= k + 1; ++t) {
        EXPECT_GE(w(k + t), w(k) / C * (1 - 1e-12)) << a << " " << k << " " << t;
        EXPECT_LE(w(k + t), w(k) * C * (1 + 1e-12)) << a << " " << k << " " << t;
      }
  }
}

TEST(Doubling, TableViolatingDeclaredConstantThrows) {
  EXPECT_THROW(Weight::table({1.0, 10.0, 10.0}, Weight::Tail::constant, 2.0), opa::AdmissibilityError);
}

TEST(Table, Validation) {
  EXPECT_THROW(Weight::table({}, Weight::Tail::constant), opa::AdmissibilityError);
  EXPECT_THROW(Weight::table({2.0, 1.0}, Weight::Tail::constant), opa::AdmissibilityError);
  EXPECT_THROW(Weight::table({1.0, 0.0}, Weight::Tail::constant), opa::AdmissibilityError);
  EXPECT_THROW(Weight::table({1.0, -1.0}, Weight::Tail::constant), opa::AdmissibilityError);
}

TEST(Table, ConstantTailExtendsLastValue) {
  const Weight w = Weight::table({1.0, 1.5, 2.0}, Weight::Tail::constant);
  EXPECT_EQ(w(1), 1.5);
  EXPECT_EQ(w(2), 2.0);
  EXPECT_EQ(w(50), 2.0);
  EXPECT_FALSE(w.alpha().has_value());
}

TEST(Table, PowerTailReproducesPowerWeight) {
  std::vector<double> v;
  for (std::size_t k = 0; k < 16; ++k) v.push_back(std::pow(static_cast<double>(k + 1), 0.5));
  const Weight w = Weight::table(v, Weight::Tail::power);
  for (std::size_t k : {16u, 40u, 1000u}) EXPECT_NEAR(w(k) / std::pow(k + 1.0, 0.5), 1.0, 1e-12);
  const double brute = oracle::brute_doubling([&](std::size_t k) { return w(k); }, 2000);
  EXPECT_LE(brute, w.doubling_constant() * (1 + 1e-12));
}

TEST(Dilate, Examples) {
  const Weight c = opa::dilate(Weight::power(0.0), 3);
  for (std::size_t t = 0; t < 20; ++t) EXPECT_EQ(c(t), 1.0);
  EXPECT_EQ(opa::dilate(Weight::power(1.0), 2)(2), 5.0);
  EXPECT_EQ(opa::dilate(Weight::power(2.0), 2)(1), 9.0);
}

TEST(Dilate, ZeroFactorThrows) { EXPECT_THROW(Weight::power(1.0).dilate(0), opa::ArgumentError); }

TEST(Dilate, IdentityFactor) {
  const Weight tab = Weight::table({1.0, 1.2, 1.3, 1.7}, Weight::Tail::power);
  for (const Weight& w : {Weight::power(-1.5), Weight::power(0.8), tab}) {
    const Weight d = w.dilate(1);
    for (std::size_t k = 0; k < 200; ++k) EXPECT_EQ(d(k), w(k));
  }
}

TEST(Dilate, DoublingConstantIsValid) {
  for (double a : {-2.0, 1.0}) {
    for (std::size_t d : {2u, 3u}) {
      const Weight w = Weight::power(a).dilate(d);
      EXPECT_EQ(w(0), 1.0);
      const double brute = oracle::brute_doubling([&](std::size_t k) { return w(k); }, 2000);
      EXPECT_LE(brute, w.doubling_constant() * (1 + 1e-12)) << a << " " << d;
    }
  }
}

TEST(Power, ReciprocalWeightsMultiplyToOne) {
  for (double a : {-2.0, -0.4, 0.3, 1.0, 2.5}) {
    const Weight w = Weight::power(a);
    const Weight r = Weight::power(-a);
    for (std::size_t k = 0; k < 5000; k += 7) EXPECT_NEAR(w(k) * r(k), 1.0, 4e-16);
  }
}

TEST(Admissibility, PowerWeightsPass) {
  for (double a : {-2.0, 0.0, 1.0, 3.0}) {
    const auto rep = opa::check_admissibility(Weight::power(a));
    EXPECT_TRUE(rep.admissible()) << a;
    EXPECT_LT(rep.ratio_deviation, rep.ratio_deviation_half + 1e-15);
  }
}

TEST(Admissibility, KTestIsConfigurable) {
  const auto small = opa::check_admissibility(Weight::power(2.0), 64);
  const auto large = opa::check_admissibility(Weight::power(2.0), 8192);
  EXPECT_GT(small.ratio_deviation, large.ratio_deviation);
  EXPECT_FALSE(small.ratio_ok);
  EXPECT_TRUE(large.ratio_ok);
  EXPECT_THROW(opa::check_admissibility(Weight::power(1.0), 1), opa::ArgumentError);
}

TEST(Admissibility, ConstantTailTablePasses) {
  const auto rep = opa::check_admissibility(Weight::table({1.0, 3.0, 2.0}, Weight::Tail::constant));
  EXPECT_TRUE(rep.admissible());
}

TEST(Power, NonFiniteExponentRejected) {
  EXPECT_THROW(Weight::power(std::nan("")), opa::ArgumentError);
  EXPECT_THROW(Weight::power(INFINITY), opa::ArgumentError);
}
