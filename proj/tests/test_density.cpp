#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tmap/density.hpp"

using namespace tmap;

namespace {

UnnormalizedLogDensity gaussian_target(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, bool with_gradient) {
  const Eigen::MatrixXd prec = cov.inverse();
  UnnormalizedLogDensity t;
  t.dimension = static_cast<std::size_t>(mean.size());
  t.log_density = [=](std::span<const double> x) {
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(x.data(), mean.size()) - mean;
    return -0.5 * d.dot(prec * d);
  };
  if (with_gradient) {
    t.gradient = [=](std::span<const double> x, std::span<double> g) {
      const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(x.data(), mean.size()) - mean;
      Eigen::Map<Eigen::VectorXd>(g.data(), mean.size()) = -prec * d;
    };
  }
  return t;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> affine_coefficients(const TriangularMap& s) {
  const auto n = static_cast<Eigen::Index>(s.dimension());
  const Eigen::VectorXd b = eval_map(s, Eigen::VectorXd(Eigen::VectorXd::Zero(n)));
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) a.col(j) = eval_map(s, Eigen::VectorXd(Eigen::VectorXd::Unit(n, j))) - b;
  return {a, b};
}

}  // namespace

TEST(NormalQuantile, KnownValues) {
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(normal_upper_quantile(1e-20), 9.262340089798408, 1e-8);
}

TEST(CdfGrid, NondecreasingAndNormalized) {
  const auto g = cdf_on_grid([](double x) { return -0.5 * x * x; }, uniform_grid(-10, 10, 2001));
  EXPECT_TRUE(std::is_sorted(g.cdf.begin(), g.cdf.end()));
  EXPECT_DOUBLE_EQ(g.cdf.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.cdf.back(), 1.0);
  EXPECT_NEAR(g.log_normalizer, 0.5 * std::log(2 * M_PI), 1e-6);
  EXPECT_NEAR(g.cdf[1000], 0.5, 1e-12);
  for (std::size_t i = 0; i < g.cdf.size(); ++i) EXPECT_NEAR(g.cdf[i] + g.upper[i], 1.0, 1e-12);
}

TEST(ScalarRearrangement, StandardNormalIsIdentity) {
  const auto r = fit_scalar_rearrangement([](double x) { return -0.5 * x * x; }, uniform_grid(-8, 8, 2001), MapSpec{});
  for (double z : {-2.0, 0.0, 1.5}) EXPECT_NEAR(r.map.value(z), z, 1e-3);
}

TEST(ScalarRearrangement, ShiftedScaledGaussian) {
  auto logp = [](double x) { return -0.125 * (x - 2.0) * (x - 2.0); };
  const auto grid = uniform_grid(-10, 14, 2000);
  const auto r = fit_scalar_rearrangement(logp, grid, MapSpec{});
  double worst = 0.0;
  for (double x : grid) {
    const double z = (x - 2.0) / 2.0;
    worst = std::max(worst, std::abs(r.map.value(z) - x));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(ScalarRearrangement, ConjugatePosterior) {
  // Prior N(0,1) times unit-noise likelihood of y* = 0: posterior N(0, 1/2).
  auto logp = [](double x) { return -0.5 * x * x - 0.5 * x * x; };
  const auto r = fit_scalar_rearrangement(logp, uniform_grid(-8, 8, 2001), MapSpec{});
  for (double z : {-2.0, -0.5, 0.0, 1.0, 2.5}) EXPECT_NEAR(r.map.value(z), z / std::sqrt(2.0), 1e-3);
}

TEST(ScalarRearrangement, SigmoidClassIsMonotone) {
  // Skewed target: a Gamma(3) density.
  auto logp = [](double x) { return x > 0 ? 2.0 * std::log(x) - x : -std::numeric_limits<double>::infinity(); };
  MapSpec spec;
  spec.p = 2;
  const auto r = fit_scalar_rearrangement(logp, uniform_grid(-1, 30, 2001), spec);
  EXPECT_GT(r.dropped_points, 0u);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 10000; ++i) EXPECT_GT(r.map.derivative(3.0 * nd(gen)), 0.0);
  // Median of Gamma(3) is about 2.674; the sigmoid class should place it
  // better than the affine class.
  const auto affine = fit_scalar_rearrangement(logp, uniform_grid(-1, 30, 2001), MapSpec{});
  EXPECT_LT(std::abs(r.map.value(0.0) - 2.674), std::abs(affine.map.value(0.0) - 2.674));
}

TEST(DensityFit, StandardNormalTargetGivesIdentity) {
  const auto t = gaussian_target(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), true);
  const auto fit = fit_map_from_density(t, 4000, MapSpec{}, SparsityPattern::dense(2), 7);
  const auto [a, b] = affine_coefficients(fit.map);
  const double tol = 3.0 / std::sqrt(4000.0);
  EXPECT_LE((a - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE(b.cwiseAbs().maxCoeff(), tol);
}

TEST(DensityFit, OneDimensionalShiftScale) {
  const auto t = gaussian_target(Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Constant(1, 1, 4.0), false);
  const auto fit = fit_map_from_density(t, 4000, MapSpec{}, SparsityPattern::dense(1), 8);
  EXPECT_TRUE(fit.report.converged);
  const std::vector<double> zero{0.0}, one{1.0};
  const auto& c = fit.map.component(0);
  EXPECT_NEAR(c.evaluate(zero), 2.0, 3.0 * 2.0 / std::sqrt(4000.0));
  EXPECT_NEAR(c.evaluate(one) - c.evaluate(zero), 2.0, 3.0 * 2.0 / std::sqrt(4000.0));
}

TEST(DensityFit, CholeskyOracle) {
  Eigen::Matrix2d cov;
  cov << 1, 0.5, 0.5, 1;
  const Eigen::Vector2d mean(1.0, -1.0);
  const auto t = gaussian_target(mean, cov, true);
  const std::size_t n_ref = 20000;
  const auto fit = fit_map_from_density(t, n_ref, MapSpec{}, SparsityPattern::dense(2), 9);
  const auto [a, b] = affine_coefficients(fit.map);
  Eigen::Matrix2d l;
  l << 1, 0, 0.5, 0.866025;
  const double tol = 3.0 / std::sqrt(static_cast<double>(n_ref));
  EXPECT_LE((a - l).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((b - mean).cwiseAbs().maxCoeff(), tol * 1.5);
}

TEST(DensityFit, ObjectiveHistoryNonincreasing) {
  Eigen::Matrix2d cov;
  cov << 2, -0.4, -0.4, 0.5;
  const auto t = gaussian_target(Eigen::Vector2d(0.5, 0.2), cov, true);
  MapSpec spec;
  spec.p = 1;
  spec.nonlinear_monotone = MonotoneScope::all_components;
  const auto fit = fit_map_from_density(t, 3000, spec, SparsityPattern::dense(2), 10);
  const auto& h = fit.report.objective_history;
  ASSERT_GT(h.size(), 2u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> z{3 * nd(gen), 3 * nd(gen)};
    EXPECT_GT(fit.map.component(0).partial_last(z), 0.0);
    EXPECT_GT(fit.map.component(1).partial_last(z), 0.0);
  }
}

TEST(DensityFit, OutputStandardizationGivesSameAnswer) {
  const auto t = gaussian_target(Eigen::VectorXd::Constant(1, 5.0), Eigen::MatrixXd::Constant(1, 1, 0.25), true);
  DensityFitOptions opts;
  opts.output_shift = Eigen::VectorXd::Constant(1, 4.0);
  opts.output_scale = Eigen::VectorXd::Constant(1, 2.0);
  const auto fit = fit_map_from_density(t, 3000, MapSpec{}, SparsityPattern::dense(1), 11, opts);
  const std::vector<double> zero{0.0}, one{1.0};
  const auto& c = fit.map.component(0);
  EXPECT_NEAR(c.evaluate(zero), 5.0, 0.05);
  EXPECT_NEAR(c.evaluate(one) - c.evaluate(zero), 0.5, 0.05);
}

TEST(DensityFit, NonFiniteStartIsAnError) {
  UnnormalizedLogDensity t;
  t.dimension = 1;
  t.log_density = [](std::span<const double> x) {
    return x[0] > 100.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(fit_map_from_density(t, 1000, MapSpec{}, SparsityPattern::dense(1), 12), ArgumentError);
}
