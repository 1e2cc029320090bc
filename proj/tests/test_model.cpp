#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "spde/model.hpp"

using namespace spde;

namespace {

ModelSpec scalar_poly_model(std::vector<double> f, std::vector<double> g, std::vector<double> h) {
  ModelSpec s;
  s.n = 1;
  s.nu = 1.0;
  auto map = [](std::vector<double> c) -> PointMap {
    return [c](std::span<const double> u, std::span<double> out) {
      double acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u[0] + *it;
      out[0] = acc;
    };
  };
  s.f = map(f);
  s.g = map(g);
  std::vector<double> dg;
  for (std::size_t i = 1; i < g.size(); ++i) dg.push_back(g[i] * static_cast<double>(i));
  s.dg = map(dg);
  s.h = map(h);
  return s;
}

// Two-component model with every term active and degree <= 3 products.
ModelSpec two_component_model() {
  ModelSpec s;
  s.n = 2;
  s.nu = 0.7;
  s.f = [](std::span<const double> u, std::span<double> o) {
    o[0] = u[0] * u[1];
    o[1] = -u[0] * u[0] * u[0];
  };
  s.g = [](std::span<const double> u, std::span<double> o) {
    o[0] = u[1];
    o[1] = 0.0;
    o[2] = 1.0;
    o[3] = u[0];
  };
  s.dg = [](std::span<const double>, std::span<double> o) {
    std::fill(o.begin(), o.end(), 0.0);
    o[(0 * 2 + 0) * 2 + 1] = 1.0;
    o[(1 * 2 + 1) * 2 + 0] = 1.0;
  };
  s.h = [](std::span<const double> u, std::span<double> o) {
    std::fill(o.begin(), o.end(), 0.0);
    o[(0 * 2 + 0) * 2 + 1] = u[0];
    o[(1 * 2 + 1) * 2 + 1] = 1.0;
  };
  return s;
}

}  // namespace

TEST(EvaluateDrift, ScalarMatchesCoefficientSpaceSums) {
  const std::vector<double> f{0.3, -1.0, 0.5, -0.2}, g{0.4, 1.0, -0.5}, h{1.0, 0.7};
  const ModelSpec spec = scalar_poly_model(f, g, h);
  const double eps = 0.3;
  for (int n : {3, 6, 8}) {
    const SpectralField u = oracle::random_field(1, n, 100 + n, 1.5);
    const SpectralField got = evaluate_drift(spec, {true, 0.0, eps, eps}, u, {2, 1.0});
    const oracle::Series us = oracle::Series::from_field(u, 0);
    const oracle::Series ux = us.derivative(1), uxx = us.derivative(2);
    const oracle::Series expect = us + oracle::poly(f, us) + (oracle::poly(g, us) * uxx).scaled(eps) +
                                  (oracle::poly(h, us) * ux * ux).scaled(eps);
    for (int k = 0; k <= n; ++k) EXPECT_NEAR(std::abs(got(0, k) - expect.at(k)), 0.0, 1e-10) << "N=" << n << " k=" << k;
  }
}

TEST(EvaluateDrift, VectorMatchesCoefficientSpaceSums) {
  const ModelSpec spec = two_component_model();
  const double eps = 0.2;
  const SpectralField u = oracle::random_field(2, 7, 5, 1.5);
  const SpectralField got = eval_F_eps(spec, eps, u, {2, 1.0});
  const oracle::Series u0 = oracle::Series::from_field(u, 0), u1 = oracle::Series::from_field(u, 1);
  const oracle::Series one = oracle::Series::constant(1.0);
  const oracle::Series f0 = u0 * u1, f1 = (u0 * u0 * u0).scaled(-1.0);
  const oracle::Series g0 = u1 * u0.derivative(2);
  const oracle::Series g1 = one * u0.derivative(2) + u0 * u1.derivative(2);
  const oracle::Series h0 = u0 * u0.derivative(1) * u1.derivative(1);
  const oracle::Series h1 = one * u1.derivative(1) * u1.derivative(1);
  const oracle::Series e0 = u0 + f0 + g0.scaled(eps) + h0.scaled(eps);
  const oracle::Series e1 = u1 + f1 + g1.scaled(eps) + h1.scaled(eps);
  for (int k = 0; k <= 7; ++k) {
    EXPECT_NEAR(std::abs(got(0, k) - e0.at(k)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(got(1, k) - e1.at(k)), 0.0, 1e-10);
  }
}

TEST(EvaluateDrift, GMatchesCoefficientSpaceSums) {
  const std::vector<double> f{0.0, -1.0, 0.0, 0.3}, h{0.5, -1.0};
  ModelSpec spec = scalar_poly_model(f, {}, h);
  spec.g = nullptr;
  spec.dg = nullptr;
  const SpectralField u = oracle::random_field(1, 8, 77, 1.5);
  const SpectralField got = eval_G(spec, u, {2, 1.0});
  const oracle::Series us = oracle::Series::from_field(u, 0);
  const oracle::Series expect = oracle::poly(f, us) + oracle::poly(h, us) * us.derivative(1) * us.derivative(1);
  for (int k = 0; k <= 8; ++k) EXPECT_NEAR(std::abs(got(0, k) - expect.at(k)), 0.0, 1e-10);

  const double c = white_noise_constant(1.0);
  const SpectralField gbar = eval_G_bar(spec, u, {2, 1.0});
  const oracle::Series ebar = expect + oracle::poly(h, us).scaled(c);
  for (int k = 0; k <= 8; ++k) EXPECT_NEAR(std::abs(gbar(0, k) - ebar.at(k)), 0.0, 1e-10);

  ModelSpec with_g = scalar_poly_model(f, {1.0}, h);
  EXPECT_THROW(eval_G(with_g, u), ConfigError);
  EXPECT_THROW(eval_G_bar(with_g, u), ConfigError);
}

TEST(EvaluateDrift, ZeroModelIsIdentity) {
  ModelSpec spec;
  const SpectralField u = oracle::random_field(1, 6, 1);
  const SpectralField out = eval_F_eps(spec, 0.5, u, {2, 1.0});
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(std::abs(out(0, k) - u(0, k)), 0.0, 1e-13);
}

TEST(EvaluateDrift, CallbackFailuresAreReported) {
  ModelSpec spec;
  spec.f = [](std::span<const double>, std::span<double>) { throw std::domain_error("boom"); };
  const SpectralField u = oracle::random_field(1, 4, 1);
  try {
    eval_F_eps(spec, 0.1, u);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("x="), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
  spec.f = [](std::span<const double>, std::span<double> o) { o[0] = std::nan(""); };
  EXPECT_THROW(eval_F_eps(spec, 0.1, u), NumericalError);
  SpectralField bad = u;
  bad(0, 1) = {INFINITY, 0.0};
  EXPECT_THROW(eval_F_eps(ModelSpec{}, 0.1, bad), NumericalError);
}

TEST(EvaluateDrift, GWithoutDerivativeRejected) {
  ModelSpec spec;
  spec.g = [](std::span<const double>, std::span<double> o) { o[0] = 1.0; };
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(EffectiveDrift, MainExamples) {
  ModelSpec main = scalar_poly_model({0.0, -1.0}, {}, {1.0});
  main.g = nullptr;
  main.dg = nullptr;
  const PointMap fbar = effective_drift(main);
  double out[1];
  for (double u : {-2.0, 0.0, 1.3}) {
    const double in[1] = {u};
    fbar(in, out);
    EXPECT_NEAR(out[0], -u + 0.5, 1e-15);
  }
  ModelSpec gch;
  gch.g = [](std::span<const double> u, std::span<double> o) { o[0] = std::sin(u[0]); };
  gch.dg = [](std::span<const double> u, std::span<double> o) { o[0] = std::cos(u[0]); };
  const PointMap gbar = effective_drift(gch);
  for (double u : {-1.0, 0.2, 2.0}) {
    const double in[1] = {u};
    gbar(in, out);
    EXPECT_NEAR(out[0], -std::cos(u) / 2.0, 1e-15);
  }
  const PointMap scaled = effective_drift(gch, 0.25);
  const double in[1] = {0.0};
  scaled(in, out);
  EXPECT_NEAR(out[0], -0.25, 1e-15);
}

TEST(EffectiveDrift, PartialTraceOfVectorModel) {
  const ModelSpec spec = two_component_model();
  const PointMap fbar = effective_drift(spec, 0.5);
  const double u[2] = {0.3, -0.7};
  double out[2];
  fbar(u, out);
  // Tr h = (h_000 + h_011, h_100 + h_111) = (0, 1); Tr Dg = (d_0 g_00 + d_1 g_01, d_0 g_10 + d_1 g_11) = (0, 0)
  EXPECT_NEAR(out[0], u[0] * u[1], 1e-15);
  EXPECT_NEAR(out[1], -u[0] * u[0] * u[0] + 0.5, 1e-15);
}

TEST(EffectiveDrift, EvalFBarUsesCorrection) {
  ModelSpec main = scalar_poly_model({0.0, -1.0}, {}, {1.0});
  main.g = nullptr;
  main.dg = nullptr;
  const SpectralField u = oracle::random_field(1, 5, 9);
  const SpectralField a = eval_F_bar(main, u, {2, 1.0});
  // u - u + 1/2: only the mean survives
  EXPECT_NEAR(a(0, 0).real(), 0.5 * kSqrtTwoPi, 1e-12);
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(std::abs(a(0, k)), 0.0, 1e-12);
}

TEST(DgConsistency, DetectsMismatch) {
  const ModelSpec spec = two_component_model();
  const std::vector<std::vector<double>> probes{{0.1, 0.2}, {-1.0, 2.0}};
  EXPECT_LT(check_dg_consistency(spec, probes), 1e-8);
  ModelSpec wrong = spec;
  wrong.dg = [](std::span<const double>, std::span<double> o) { std::fill(o.begin(), o.end(), 0.0); };
  EXPECT_GT(check_dg_consistency(wrong, probes), 0.5);
}

TEST(Potential, MappingCoefficients) {
  // V(u) = u^4 / 4 at T = 2, m = 1
  const std::vector<double> c{0, 0, 0, 0, 0.25};
  const PotentialSpec p = potential_from_polynomial(Polynomial::univariate(c), 2.0, 1.0);
  const auto [spec, eps] = from_potential(p);
  EXPECT_NEAR(spec.nu, 0.25, 1e-15);
  EXPECT_NEAR(eps, 0.5, 1e-15);
  const double u[1] = {1.5};
  double out[1];
  spec.f(u, out);
  EXPECT_NEAR(out[0], -(3.0 * 2.25) * (3.375) / 4.0, 1e-12);
  spec.g(u, out);
  EXPECT_NEAR(out[0], -2.0 * 3.0 * 2.25 / 2.0, 1e-12);
  spec.h(u, out);
  EXPECT_NEAR(out[0], -6.0 * 1.5 / 2.0, 1e-12);
  spec.dg(u, out);
  EXPECT_NEAR(out[0], -2.0 * 6.0 * 1.5 / 2.0, 1e-12);
  EXPECT_THROW(from_potential(potential_from_polynomial(Polynomial::univariate(c), 0.0, 1.0)), ConfigError);
}

TEST(Potential, EffectiveDriftIdentityOnRandomPolynomials) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 3), deg(2, 6);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::uniform_real_distribution<double> temp(0.2, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = dim(rng);
    Polynomial v(n);
    const int max_deg = deg(rng);
    for (int t = 0; t < 8; ++t) {
      std::vector<int> e(n, 0);
      int budget = std::uniform_int_distribution<int>(0, max_deg)(rng);
      for (int q = 0; q < budget; ++q) ++e[std::uniform_int_distribution<int>(0, n - 1)(rng)];
      v.add_term(e, coef(rng));
    }
    const PotentialSpec p = potential_from_polynomial(v, temp(rng), 0.5);
    std::vector<std::vector<double>> probes(10, std::vector<double>(n));
    for (auto& pt : probes)
      for (auto& x : pt) x = coef(rng);
    EXPECT_LE(check_effective_drift_identity(p, probes), 1e-10);
    const auto [spec, eps] = from_potential(p);
    EXPECT_LT(check_dg_consistency(spec, probes), 1e-5);
  }
}

TEST(Polynomial, DerivativesAndValidation) {
  Polynomial p(2);
  p.add_term({2, 1}, 3.0);  // 3 x^2 y
  p.add_term({0, 0}, 1.0);
  EXPECT_EQ(p.degree(), 3);
  const double x[2] = {2.0, -1.0};
  EXPECT_NEAR(p(x), -11.0, 1e-15);
  EXPECT_NEAR(p.derivative(0)(x), -12.0, 1e-15);
  EXPECT_NEAR(p.derivative(1)(x), 12.0, 1e-15);
  EXPECT_THROW(p.add_term({1}, 1.0), ConfigError);
  EXPECT_THROW(p.add_term({-1, 0}, 1.0), ConfigError);
}
