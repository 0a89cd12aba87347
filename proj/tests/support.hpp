#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "tmap/basis.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap::testing {

inline UnivariateFunction random_nonmonotone(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale(0.3, 2.0);
  std::vector<Term> terms{{nd(gen), BasisFunction::linear()}};
  for (int j = 0; j < p; ++j) terms.push_back({nd(gen), BasisFunction::rbf(nd(gen), scale(gen))});
  return UnivariateFunction(terms, false);
}

inline UnivariateFunction random_monotone(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> coef(0.05, 2.0);
  std::uniform_real_distribution<double> scale(0.3, 2.0);
  if (p == 0) return UnivariateFunction::linear(coef(gen), true);
  std::vector<double> centers;
  for (int j = 0; j < p + 2; ++j) centers.push_back(nd(gen));
  std::sort(centers.begin(), centers.end());
  std::vector<Term> terms{{coef(gen), BasisFunction::sigmoid_left(centers[0], scale(gen))}};
  for (int j = 1; j <= p; ++j) terms.push_back({coef(gen), BasisFunction::sigmoid_bump(centers[j], scale(gen))});
  terms.push_back({coef(gen), BasisFunction::sigmoid_right(centers[p + 1], scale(gen))});
  return UnivariateFunction(terms, true);
}

/// Dense lower-triangular map with random separable components.
inline TriangularMap random_map(std::mt19937_64& gen, std::size_t n, int p, std::size_t data_dim = 0) {
  std::normal_distribution<double> nd;
  std::vector<MapComponent> comps;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<NonmonotonePart> parts;
    for (std::size_t i = 0; i < data_dim + k; ++i) parts.push_back({i, random_nonmonotone(gen, p)});
    comps.emplace_back(k, data_dim + k, parts, random_monotone(gen, p), nd(gen));
  }
  return TriangularMap(data_dim, comps);
}

inline Eigen::MatrixXd gaussian_samples(std::mt19937_64& gen, const Eigen::MatrixXd& cov, Eigen::Index m,
                                        const Eigen::VectorXd& mean = Eigen::VectorXd()) {
  std::normal_distribution<double> nd;
  const Eigen::MatrixXd l = cov.llt().matrixL();
  Eigen::MatrixXd x(m, cov.rows());
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd z(cov.rows());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = nd(gen);
    Eigen::VectorXd v = l * z;
    if (mean.size() > 0) v += mean;
    x.row(i) = v.transpose();
  }
  return x;
}

}  // namespace tmap::testing
