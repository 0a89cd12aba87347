#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace tmap {

/// ||mean - truth||_2 / sqrt(n).
double rmse(const Eigen::VectorXd& mean, const Eigen::VectorXd& truth);

/// Root of the mean per-coordinate sample variance (divisor M - 1).
double spread(const Eigen::MatrixXd& states);

/// Components whose truth lies in the ensemble's empirical [2.5%, 97.5%]
/// marginal interval.
std::size_t coverage_hits(const Eigen::MatrixXd& states, const Eigen::VectorXd& truth);

/// CRPS of the empirical CDF of particles against the truth, in energy form:
/// mean |X_i - z| - mean |X_i - X_j| / 2.
double crps(std::vector<double> particles, double truth);

/// Mean CRPS over components.
double mean_crps(const Eigen::MatrixXd& states, const Eigen::VectorXd& truth);

}  // namespace tmap
