#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tmap/estimation.hpp"
#include "tmap/sparsity.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {

/// log pi up to an additive constant. The gradient is optional; without it
/// central differences are used.
struct UnnormalizedLogDensity {
  std::size_t dimension = 1;
  std::function<double(std::span<const double>)> log_density;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

double normal_quantile(double p);
/// Quantile at 1 - q, accurate when q is tiny.
double normal_upper_quantile(double q);

/// Trapezoid CDF of a 1-D unnormalized density on increasing grid points.
/// upper holds 1 - cdf accumulated from the right, so both tails keep their
/// relative accuracy.
struct CdfGrid {
  std::vector<double> points;
  std::vector<double> cdf;
  std::vector<double> upper;
  double log_normalizer = 0.0;
};

CdfGrid cdf_on_grid(const std::function<double(double)>& log_density, std::vector<double> points);

std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

struct DensityFitOptions {
  double gradient_tolerance = 1e-6;
  int max_iterations = 1000;
  double stall_tolerance = 1e-4;
  /// Maps are parameterized as shift + scale * U(z); identity start then
  /// means a diagonal Gaussian with these moments.
  Eigen::VectorXd output_shift;
  Eigen::VectorXd output_scale;
};

/// Minimizes -mean[log pi(U(z)) + sum_k log dU^k/dz_k] over reference samples
/// z (rows of reference). Components beyond the identity cutoff stay at
/// shift + scale * z_k.
FittedMap fit_map_from_density(const UnnormalizedLogDensity& target, const Eigen::MatrixXd& reference,
                               const MapSpec& spec, const SparsityPattern& sparsity,
                               const DensityFitOptions& options = {});

/// Draws count standard-normal reference samples from the seeded stream.
FittedMap fit_map_from_density(const UnnormalizedLogDensity& target, std::size_t count, const MapSpec& spec,
                               const SparsityPattern& sparsity, std::uint64_t seed,
                               const DensityFitOptions& options = {});

Eigen::MatrixXd reference_samples(std::size_t count, std::size_t dimension, std::uint64_t seed);

inline std::size_t default_reference_count(std::size_t ensemble_size) {
  return std::max<std::size_t>(10 * ensemble_size, 1000);
}

/// Grid points with less CDF mass than this in either tail are dropped: their
/// trapezoid CDF carries a large relative error.
inline constexpr double kTailMass = 1e-6;

struct ScalarRearrangement {
  UnivariateFunction map;
  CdfGrid grid;
  std::size_t dropped_points = 0;
};

/// Fits an increasing m with m(N(0,1)) distributed like the target, by least
/// squares on pairs (quantile of the standard normal at the grid CDF, grid point).
ScalarRearrangement fit_scalar_rearrangement(const std::function<double(double)>& log_density,
                                             std::vector<double> grid, const MapSpec& spec);

}  // namespace tmap
