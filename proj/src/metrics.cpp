#include "tmap/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tmap/centers.hpp"
#include "tmap/error.hpp"

namespace tmap {

double rmse(const Eigen::VectorXd& mean, const Eigen::VectorXd& truth) {
  if (mean.size() != truth.size() || mean.size() == 0) throw ArgumentError("rmse: dimension mismatch");
  return (mean - truth).norm() / std::sqrt(static_cast<double>(mean.size()));
}

double spread(const Eigen::MatrixXd& states) {
  if (states.rows() < 2) throw ArgumentError("spread needs at least two particles");
  const Eigen::MatrixXd a = states.rowwise() - states.colwise().mean();
  const double total_variance = a.squaredNorm() / static_cast<double>(states.rows() - 1);
  return std::sqrt(total_variance / static_cast<double>(states.cols()));
}

std::size_t coverage_hits(const Eigen::MatrixXd& states, const Eigen::VectorXd& truth) {
  if (states.cols() != truth.size()) throw ArgumentError("coverage: dimension mismatch");
  std::size_t hits = 0;
  std::vector<double> column(static_cast<std::size_t>(states.rows()));
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    Eigen::Map<Eigen::VectorXd>(column.data(), states.rows()) = states.col(i);
    std::sort(column.begin(), column.end());
    const double lo = sorted_quantile(column, 0.025);
    const double hi = sorted_quantile(column, 0.975);
    if (truth[i] >= lo && truth[i] <= hi) ++hits;
  }
  return hits;
}

double crps(std::vector<double> particles, double truth) {
  if (particles.empty()) throw ArgumentError("crps needs at least one particle");
  std::sort(particles.begin(), particles.end());
  const auto m = static_cast<double>(particles.size());
  double absolute = 0.0;
  double pairwise = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    absolute += std::abs(particles[i] - truth);
    // Sorted order: sum_{i,j} |x_i - x_j| = 2 sum_i (2i - M + 1) x_(i).
    pairwise += (2.0 * static_cast<double>(i) - m + 1.0) * particles[i];
  }
  return absolute / m - pairwise / (m * m);
}

double mean_crps(const Eigen::MatrixXd& states, const Eigen::VectorXd& truth) {
  if (states.cols() != truth.size()) throw ArgumentError("crps: dimension mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    const Eigen::VectorXd c = states.col(i);
    total += crps(std::vector<double>(c.data(), c.data() + c.size()), truth[i]);
  }
  return total / static_cast<double>(states.cols());
}

}  // namespace tmap
