#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tmap/filters.hpp"
#include "tmap/metrics.hpp"

using namespace tmap;

namespace {

double crps_brute_force(const std::vector<double>& x, double truth) {
  const auto m = static_cast<double>(x.size());
  double a = 0.0, b = 0.0;
  for (double xi : x) {
    a += std::abs(xi - truth);
    for (double xj : x) b += std::abs(xi - xj);
  }
  return a / m - 0.5 * b / (m * m);
}

// Trapezoid rule for the integral of (F(z) - 1{z >= truth})^2. Nodes include
// every jump so each panel is evaluated with one-sided limits.
double crps_quadrature(std::vector<double> x, double truth, int panels_per_gap) {
  std::sort(x.begin(), x.end());
  auto integrand = [&](double z) {
    const double f = static_cast<double>(std::upper_bound(x.begin(), x.end(), z) - x.begin()) /
                     static_cast<double>(x.size());
    const double h = z >= truth ? 1.0 : 0.0;
    return (f - h) * (f - h);
  };
  std::vector<double> breaks = x;
  breaks.push_back(truth);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    if (b <= a) continue;
    const double h = (b - a) / panels_per_gap;
    const double inset = 1e-9 * h;
    for (int k = 0; k < panels_per_gap; ++k) {
      const double lo = a + k * h;
      const double hi = lo + h;
      total += 0.5 * h * (integrand(lo + inset) + integrand(hi - inset));
    }
  }
  return total;
}

}  // namespace

TEST(Rmse, Examples) {
  EXPECT_DOUBLE_EQ(rmse(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)), 0.0);
  EXPECT_DOUBLE_EQ(rmse(Eigen::Vector4d(1, 1, 1, 1), Eigen::Vector4d::Zero()), 1.0);
  EXPECT_DOUBLE_EQ(rmse(Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, 2.0)), 3.0);
  EXPECT_THROW(rmse(Eigen::Vector2d(0, 0), Eigen::Vector3d(0, 0, 0)), ArgumentError);
}

TEST(Spread, Examples) {
  EXPECT_DOUBLE_EQ(spread(Eigen::MatrixXd::Constant(5, 3, 2.0)), 0.0);
  Eigen::MatrixXd pair(2, 1);
  pair << -1.0, 1.0;
  EXPECT_DOUBLE_EQ(spread(pair), std::sqrt(2.0));
  EXPECT_THROW(spread(Eigen::MatrixXd::Zero(1, 2)), ArgumentError);
}

TEST(Spread, ScalesWithInflation) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(30, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
  EXPECT_NEAR(spread(inflate(x, 1.7)), 1.7 * spread(x), 1e-12);
}

TEST(Coverage, Examples) {
  Eigen::MatrixXd x(100, 3);
  for (int i = 0; i < 100; ++i) x.row(i).setConstant(i / 99.0);
  EXPECT_EQ(coverage_hits(x, Eigen::Vector3d(0.5, 0.4, 0.6)), 3u);
  EXPECT_EQ(coverage_hits(x, Eigen::Vector3d(10, -10, 5)), 0u);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd uniform(10000, 1);
  for (Eigen::Index i = 0; i < uniform.rows(); ++i) uniform(i, 0) = u(gen);
  EXPECT_EQ(coverage_hits(uniform, Eigen::VectorXd::Constant(1, 0.5)), 1u);
  EXPECT_EQ(coverage_hits(uniform, Eigen::VectorXd::Constant(1, 0.99)), 0u);
}

TEST(Crps, Examples) {
  EXPECT_DOUBLE_EQ(crps({2.5}, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(crps({0.0, 1.0}, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(crps({1.0}, 4.0), 3.0);
  EXPECT_THROW(crps({}, 0.0), ArgumentError);
}

TEST(Crps, MatchesQuadratureOfDefiningIntegral) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(1, 50);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(size(gen)));
    for (double& v : x) v = 2.0 * nd(gen);
    const double truth = 2.0 * nd(gen);
    EXPECT_NEAR(crps(x, truth), crps_quadrature(x, truth, 8), 1e-6) << "trial " << trial;
  }
}

TEST(Metrics, MatchBruteForceRecomputation) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 40 + trial;
    const int n = 1 + trial % 6;
    Eigen::MatrixXd x(m, n);
    Eigen::VectorXd truth(n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
    for (int i = 0; i < n; ++i) truth[i] = 1.5 * nd(gen);

    double sq = 0.0, var = 0.0, crps_total = 0.0;
    std::size_t hits = 0;
    for (int i = 0; i < n; ++i) {
      double mean = 0.0;
      for (int k = 0; k < m; ++k) mean += x(k, i) / m;
      sq += (mean - truth[i]) * (mean - truth[i]);
      for (int k = 0; k < m; ++k) var += (x(k, i) - mean) * (x(k, i) - mean) / (m - 1);
      std::vector<double> col(m);
      for (int k = 0; k < m; ++k) col[k] = x(k, i);
      crps_total += crps_brute_force(col, truth[i]);
      std::sort(col.begin(), col.end());
      auto quantile = [&](double q) {
        const double pos = q * (m - 1);
        const auto lo = static_cast<int>(std::floor(pos));
        const int hi = std::min(lo + 1, m - 1);
        return col[lo] + (pos - lo) * (col[hi] - col[lo]);
      };
      if (truth[i] >= quantile(0.025) && truth[i] <= quantile(0.975)) ++hits;
    }
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    EXPECT_NEAR(rmse(mean, truth), std::sqrt(sq / n), 1e-10);
    EXPECT_NEAR(spread(x), std::sqrt(var / n), 1e-10);
    EXPECT_EQ(coverage_hits(x, truth), hits);
    EXPECT_NEAR(mean_crps(x, truth), crps_total / n, 1e-6);
  }
}

TEST(Metrics, Nonnegative) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd x(10, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
    const Eigen::Vector3d truth(nd(gen), nd(gen), nd(gen));
    EXPECT_GE(mean_crps(x, truth), 0.0);
    EXPECT_GE(spread(x), 0.0);
    EXPECT_LE(coverage_hits(x, truth), 3u);
  }
}
