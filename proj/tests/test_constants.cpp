#include <gtest/gtest.h>

#include <cmath>

#include "spde/constants.hpp"

using namespace spde;

TEST(WhiteNoiseConstant, Values) {
  EXPECT_EQ(white_noise_constant(1.0), 0.5);
  EXPECT_NEAR(white_noise_constant(4.0), 0.25, 1e-16);
  EXPECT_THROW(white_noise_constant(0.0), ConfigError);
}

TEST(AlphaConstant, ClosedForm) {
  EXPECT_NEAR(alpha_constant(1.0, 0.25), 1.0 / std::sqrt(2.0), 1e-8);
  // int_0^inf x^{-2a} / (1 + x^2) dx = pi / (2 cos(pi a))
  for (double nu : {0.5, 1.0, 3.0})
    for (double a : {0.05, 0.2, 0.35, 0.45}) {
      const double exact = 1.0 / (2.0 * std::pow(nu, a + 0.5) * std::cos(kPi * a));
      EXPECT_NEAR(alpha_constant(nu, a), exact, 1e-10 * exact);
    }
  EXPECT_THROW(alpha_constant(1.0, 0.5), ConfigError);
  EXPECT_THROW(alpha_constant(1.0, 0.0), ConfigError);
}

TEST(AlphaConstant, TailStrategiesAgree) {
  QuadratureConfig trunc;
  trunc.tail = TailStrategy::kTruncation;
  trunc.truncation_point = 1e4;
  for (double a : {0.1, 0.25, 0.4}) EXPECT_NEAR(alpha_constant(1.0, a, trunc), alpha_constant(1.0, a), 1e-8);
}

TEST(PolyConstant, ClosedForms) {
  for (double nu : {0.5, 1.0, 2.0}) EXPECT_NEAR(poly_constant(nu, {1.0, 1.0 / nu}), 1.0 / (2.0 * std::sqrt(nu)), 1e-8);
  EXPECT_NEAR(poly_constant(1.0, {1.0, 2.0, 1.0}), 0.25, 1e-8);
  // Q = 1 + y^2: int dx / (1 + x^4) = pi / (2 sqrt 2)
  EXPECT_NEAR(poly_constant(1.0, {1.0, 0.0, 1.0}), 1.0 / (2.0 * std::sqrt(2.0)), 1e-10);
  QuadratureConfig trunc;
  trunc.tail = TailStrategy::kTruncation;
  EXPECT_NEAR(poly_constant(1.0, {1.0, 2.0, 1.0}, trunc), 0.25, 1e-8);
}

TEST(PolyConstant, Validation) {
  EXPECT_THROW(poly_constant(1.0, {1.0}), ConfigError);
  EXPECT_THROW(poly_constant(1.0, {2.0, 1.0}), ConfigError);
  EXPECT_THROW(poly_constant(1.0, {1.0, -1.0}), ConfigError);
  EXPECT_THROW(poly_constant(1.0, {1.0, -3.0, 1.0}), ConfigError);  // root at y ~ 0.38
  EXPECT_NO_THROW(poly_constant(1.0, {1.0, -1.0, 1.0}));             // positive on [0, inf)
}

TEST(TruncationMatched, ConvergesToAsymptoticConstant) {
  EXPECT_NEAR(truncation_matched_constant(1.0, 1.0 / 128, 1024), 0.4566, 1e-3);
  double prev = 0.0;
  for (int j = 3; j <= 12; ++j) {
    const double eps = std::ldexp(1.0, -j);
    const double c = truncation_matched_constant(1.0, eps, static_cast<int>(1e4 / eps));
    EXPECT_LT(std::abs(c - 0.5), 4.0 * eps);
    EXPECT_GT(c, prev - 1e-12);
    prev = c;
  }
  EXPECT_THROW(truncation_matched_constant(1.0, 0.1, 0), ConfigError);
}

TEST(LatticeSum, CothOracle) {
  // sum_{k in Z} eps / (nu + eps^2 k^2) = pi coth(pi sqrt(nu) / eps) / sqrt(nu)
  for (double nu : {0.5, 1.0, 2.0})
    for (double eps : {0.5, 0.1, 0.01}) {
      auto s = [=](double x) { return eps / (nu + eps * eps * x * x); };
      auto ds = [=](double x) {
        const double d = nu + eps * eps * x * x;
        return -2.0 * eps * eps * eps * x / (d * d);
      };
      const double kk = 2000.0;
      auto tail = [=](double t) { return eps * kk / (nu * t * t + eps * eps * kk * kk); };
      const double got = lattice_sum(s, ds, tail, 2000);
      const double exact = kPi / std::tanh(kPi * std::sqrt(nu) / eps) / std::sqrt(nu);
      EXPECT_NEAR(got, exact, 1e-9 * exact);
    }
}

TEST(RiemannGap, BelowFiveEps) {
  for (int j = 1; j <= 10; ++j) {
    const double eps = std::ldexp(1.0, -j);
    const double gap = riemann_gap(1.0, eps);
    EXPECT_LE(gap, 5.0 * eps);
    EXPECT_GT(gap, 0.0);
  }
  // leading behaviour eps * pi coth(pi)
  EXPECT_NEAR(riemann_gap(1.0, std::ldexp(1.0, -10)) / std::ldexp(1.0, -10), kPi / std::tanh(kPi), 0.01);
  EXPECT_THROW(riemann_gap(1.0, 0.0), ConfigError);
}
