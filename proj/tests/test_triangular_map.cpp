#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tmap/error.hpp"
#include "tmap/triangular_map.hpp"

using namespace tmap;
using tmap::testing::random_map;

namespace {

MapComponent affine(std::size_t k, std::vector<std::pair<std::size_t, double>> off, double slope, double c = 0.0) {
  std::vector<NonmonotonePart> parts;
  for (auto [i, a] : off) parts.push_back({i, UnivariateFunction::linear(a)});
  return MapComponent(k, k, parts, UnivariateFunction::linear(slope, true), c);
}

// S(z) = (2 z1, z1 + 3 z2)
TriangularMap small_map() { return TriangularMap(0, {affine(0, {}, 2.0), affine(1, {{0, 1.0}}, 3.0)}); }

}  // namespace

TEST(MapComponent, AffineEvaluation) {
  const auto c = affine(0, {}, 2.0);
  const std::vector<double> z{3.0};
  EXPECT_DOUBLE_EQ(eval_component(c, z), 6.0);
  EXPECT_DOUBLE_EQ(partial_last(c, z), 2.0);
}

TEST(MapComponent, RbfAndBumpTerms) {
  const MapComponent rbf(0, 0, {}, UnivariateFunction({{1.0, BasisFunction::sigmoid_bump(0.0, 1.0)}}, true), 0.0);
  const std::vector<double> z0{0.0};
  EXPECT_DOUBLE_EQ(eval_component(rbf, z0), 0.5);
  EXPECT_NEAR(partial_last(rbf, z0), 1.0 / std::sqrt(2 * M_PI), 1e-15);

  const MapComponent with_rbf(1, 1, {{0, UnivariateFunction({{1.0, BasisFunction::rbf(0.0, 1.0)}}, false)}},
                              UnivariateFunction::linear(1.0, true), 0.0);
  const std::vector<double> z{0.0, 0.0};
  EXPECT_NEAR(eval_component(with_rbf, z), 0.398942, 1e-6);
}

TEST(MapComponent, MissingInputIsAnError) {
  const auto c = affine(2, {{0, 1.0}}, 1.0);
  const std::vector<double> z{1.0, 2.0};
  EXPECT_THROW(eval_component(c, z), ArgumentError);
}

TEST(MapComponent, ActiveInputsSortedWithOwnIndexLast) {
  const auto c = affine(3, {{2, 1.0}, {0, 1.0}}, 1.0);
  EXPECT_EQ(c.active_inputs(), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_THROW(affine(1, {{1, 1.0}}, 1.0), ArgumentError);
  EXPECT_THROW(MapComponent(0, 0, {}, UnivariateFunction::linear(1.0, false), 0.0), ArgumentError);
}

TEST(TriangularMap, IdentityEvaluation) {
  const auto id = TriangularMap::identity(4);
  const Eigen::Vector4d z(1.5, -2.0, 0.25, 7.0);
  EXPECT_EQ(eval_map(id, z), Eigen::VectorXd(z));
  EXPECT_EQ(invert_triangular(id, z), Eigen::VectorXd(z));
}

TEST(TriangularMap, HandArithmetic) {
  const auto s = small_map();
  const Eigen::Vector2d v = eval_map(s, Eigen::VectorXd(Eigen::Vector2d(4.0, 1.0)));
  EXPECT_DOUBLE_EQ(v[0], 8.0);
  EXPECT_DOUBLE_EQ(v[1], 7.0);
  const Eigen::VectorXd z = invert_triangular(s, Eigen::VectorXd(Eigen::Vector2d(4.0, 10.0)));
  EXPECT_DOUBLE_EQ(z[0], 2.0);
  EXPECT_NEAR(z[1], 8.0 / 3.0, 1e-15);
}

TEST(TriangularMap, InverseCholeskyOfCorrelatedGaussian) {
  const TriangularMap s(0, {affine(0, {}, 1.0), affine(1, {{0, -0.57735}}, 1.15470)});
  const Eigen::VectorXd v = eval_map(s, Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0)));
  EXPECT_NEAR(v[0], 1.0, 1e-12);
  EXPECT_NEAR(v[1], 0.57735, 1e-5);
}

TEST(TriangularMap, DimensionMismatch) {
  const auto s = small_map();
  EXPECT_THROW(eval_map(s, Eigen::VectorXd(Eigen::Vector3d(1, 2, 3))), ArgumentError);
  EXPECT_THROW(invert_triangular(s, Eigen::VectorXd(Eigen::Vector3d(1, 2, 3))), ArgumentError);
}

TEST(Inversion, CubicRoot) {
  const double z = solve_increasing([](double x) { return x * x * x + x; }, [](double x) { return 3 * x * x + 1; },
                                    2.0, 0.0, 1.0);
  EXPECT_NEAR(z, 1.0, 1e-10);
}

TEST(Inversion, FarTargetNeedsBracketExpansion) {
  const double z = solve_increasing([](double x) { return x; }, [](double) { return 1.0; }, 5e5, 0.0, 1.0);
  EXPECT_NEAR(z, 5e5, 1e-6);
}

TEST(Inversion, UnreachableTargetReportsComponent) {
  // A bounded increasing function cannot reach 2.
  try {
    solve_increasing([](double x) { return std::tanh(x); }, [](double x) { return 1 - std::tanh(x) * std::tanh(x); },
                     2.0, 0.0, 1.0, 7);
    FAIL() << "expected nonconvergence";
  } catch (const NonconvergenceError& e) {
    EXPECT_EQ(e.component(), 7u);
  }
}

TEST(Inversion, RoundTripOnRandomMaps) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const int p = trial % 4;
    const auto s = random_map(gen, n, p, trial % 2);
    Eigen::VectorXd data(s.data_dimension());
    for (Eigen::Index i = 0; i < data.size(); ++i) data[i] = nd(gen);
    for (int pt = 0; pt < 20; ++pt) {
      Eigen::VectorXd x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = 3.0 * nd(gen);
      const Eigen::VectorXd z = invert_triangular(s, x, data);
      Eigen::VectorXd full(s.input_dimension());
      full << data, z;
      EXPECT_LE((eval_map(s, full) - x).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Properties, MonotoneAndTriangular) {
  std::mt19937_64 gen(13);
  std::normal_distribution<double> nd;
  const auto s = random_map(gen, 5, 3);
  for (int pt = 0; pt < 10000; ++pt) {
    Eigen::VectorXd z(5);
    for (int i = 0; i < 5; ++i) z[i] = 4.0 * nd(gen);
    const Eigen::VectorXd base = eval_map(s, z);
    for (std::size_t k = 0; k < 5; ++k) {
      ASSERT_GT(partial_last(s.component(k), std::span<const double>(z.data(), 5)), 0.0);
    }
    if (pt % 100 == 0) {
      for (int j = 0; j < 5; ++j) {
        Eigen::VectorXd zp = z;
        zp[j] += nd(gen);
        const Eigen::VectorXd moved = eval_map(s, zp);
        for (int k = 0; k < j; ++k) EXPECT_EQ(moved[k], base[k]);
      }
    }
  }
}

TEST(Properties, PartialMatchesFiniteDifference) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_map(gen, 3, 1 + trial % 3);
    std::vector<double> z{nd(gen), nd(gen), nd(gen)};
    for (std::size_t k = 0; k < 3; ++k) {
      auto zp = z;
      auto zm = z;
      zp[k] += h;
      zm[k] -= h;
      const auto& c = s.component(k);
      const double fd = (c.evaluate(zp) - c.evaluate(zm)) / (2 * h);
      const double an = c.partial_last(z);
      EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST(Pullback, ClosedFormValues) {
  const auto id = TriangularMap::identity(1);
  EXPECT_NEAR(log_pullback_density(id, Eigen::VectorXd::Zero(1)), -0.918939, 1e-6);
  const TriangularMap twice(0, {affine(0, {}, 2.0)});
  EXPECT_NEAR(log_pullback_density(twice, Eigen::VectorXd::Zero(1)), -0.918938533 + std::log(2.0), 1e-9);
}

TEST(Pullback, IntegratesToOneOnGrid) {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_map(gen, 1, trial % 4);
    // Locate the bulk through the inverse map, then integrate on a fine grid.
    const double lo = invert_triangular(s, Eigen::VectorXd::Constant(1, -9.0))[0];
    const double hi = invert_triangular(s, Eigen::VectorXd::Constant(1, 9.0))[0];
    const int n = 200000;
    const double h = (hi - lo) / n;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      integral += w * std::exp(log_pullback_density(s, Eigen::VectorXd::Constant(1, lo + i * h)));
    }
    EXPECT_NEAR(integral * h, 1.0, 1e-3);
  }
}

TEST(Pullback, GradientMatchesFiniteDifference) {
  std::mt19937_64 gen(23);
  std::normal_distribution<double> nd;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_map(gen, 3, trial % 3);
    Eigen::VectorXd z(3);
    for (int i = 0; i < 3; ++i) z[i] = nd(gen);
    const Eigen::VectorXd g = log_pullback_gradient(s, std::span<const double>(z.data(), 3));
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      const double fd = (log_pullback_density(s, zp) - log_pullback_density(s, zm)) / (2 * h);
      EXPECT_NEAR(fd, g[j], 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Pullback, RequiresMapWithoutData) {
  std::mt19937_64 gen(29);
  const auto s = random_map(gen, 2, 0, 1);
  EXPECT_THROW(log_pullback_density(s, Eigen::VectorXd::Zero(2)), ArgumentError);
}
