#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "spde/stats.hpp"

using namespace spde;

TEST(PairwiseSum, MatchesNaiveSumAndIsOrderDefined) {
  std::vector<double> xs;
  for (int i = 1; i <= 1000; ++i) xs.push_back(1.0 / i);
  double naive = 0.0;
  for (double x : xs) naive += x;
  EXPECT_NEAR(pairwise_sum(xs), naive, 1e-12);
  EXPECT_EQ(pairwise_sum(xs), pairwise_sum(std::vector<double>(xs)));
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
  // 1e16 + 1 + ... loses every 1 in a naive left fold; pairwise keeps half of them.
  std::vector<double> hard(1024, 1.0);
  hard[0] = 1e16;
  EXPECT_GT(pairwise_sum(hard), 1e16 + 500.0);
}

TEST(MeanAndStandardError, SmallSample) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(mean(xs), 2.5);
  EXPECT_NEAR(standard_error(xs), std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_TRUE(std::isnan(mean(std::vector<double>{})));
  EXPECT_TRUE(std::isnan(standard_error(std::vector<double>{1.0})));
}

TEST(Quantile, TypeSeven) {
  const std::vector<double> xs{3.0, 1.0, 4.0, 1.0, 5.0};
  EXPECT_DOUBLE_EQ(quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(xs, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(xs, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(xs, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 0.25), 1.25);
  EXPECT_THROW(quantile(xs, 1.5), ConfigError);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(RegressLogLog, ExactPowerLaw) {
  std::vector<double> x, y;
  for (int j = 1; j <= 6; ++j) {
    x.push_back(std::ldexp(1.0, -j));
    y.push_back(3.0 * std::pow(x.back(), 0.7));
  }
  const LogLogFit f = regress_loglog(x, y);
  EXPECT_NEAR(f.slope, 0.7, 1e-13);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-13);
  EXPECT_NEAR(f.ci_low, 0.7, 1e-6);
  EXPECT_NEAR(f.ci_high, 0.7, 1e-6);
  EXPECT_EQ(f.points, 6u);
}

TEST(RegressLogLog, ConstantY) {
  const LogLogFit f = regress_loglog(std::vector<double>{1, 2, 4, 8}, std::vector<double>{5, 5, 5, 5});
  EXPECT_NEAR(f.slope, 0.0, 1e-15);
  EXPECT_EQ(f.r2, 1.0);
}

TEST(RegressLogLog, EigenOracle) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> wdist(0.5, 2.0);
  const int n = 5;
  std::vector<double> x, y, w;
  for (int i = 0; i < n; ++i) {
    x.push_back(std::pow(2.0, -i - 1.0));
    y.push_back(std::pow(x.back(), 0.5) * std::exp(noise(gen)));
    w.push_back(wdist(gen));
  }
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  Eigen::VectorXd sw(n);
  for (int i = 0; i < n; ++i) {
    sw(i) = std::sqrt(w[i]);
    a(i, 0) = sw(i);
    a(i, 1) = sw(i) * std::log(x[i]);
    b(i) = sw(i) * std::log(y[i]);
  }
  const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(b);
  const double sse = (a * beta - b).squaredNorm();
  const Eigen::MatrixXd cov = (sse / (n - 2)) * (a.transpose() * a).inverse();
  const double t975_dof3 = 3.182446305284263;

  const LogLogFit f = regress_loglog(x, y, w);
  EXPECT_NEAR(f.slope, beta(1), 1e-12);
  EXPECT_NEAR(f.intercept, beta(0), 1e-12);
  EXPECT_NEAR(f.ci_high - f.slope, t975_dof3 * std::sqrt(cov(1, 1)), 1e-10);
  EXPECT_NEAR(f.slope - f.ci_low, t975_dof3 * std::sqrt(cov(1, 1)), 1e-10);
}

TEST(RegressLogLog, Errors) {
  const std::vector<double> x{1, 2, 3}, y{1, 2, 3};
  EXPECT_THROW(regress_loglog(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ConfigError);
  EXPECT_THROW(regress_loglog(x, std::vector<double>{1, 2}), ConfigError);
  EXPECT_THROW(regress_loglog(x, std::vector<double>{1, 0, 3}), ConfigError);
  EXPECT_THROW(regress_loglog(std::vector<double>{2, 2, 2}, y), ConfigError);
  EXPECT_THROW(regress_loglog(x, y, std::vector<double>{1, 1}), ConfigError);
  EXPECT_THROW(regress_loglog(x, y, std::vector<double>{1, -1, 1}), ConfigError);
}
