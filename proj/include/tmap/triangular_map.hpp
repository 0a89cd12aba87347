#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "tmap/basis.hpp"

namespace tmap {

/// Input positions index the concatenated vector [data..., state...]. A
/// component of a map with data_dim data slots and state index k has its
/// monotone input at position data_dim + k.
struct NonmonotonePart {
  std::size_t input = 0;
  UnivariateFunction function;

  bool operator==(const NonmonotonePart&) const = default;
};

/// U(inputs) = c + sum_i u_i(inputs[i]) + u_k(inputs[monotone_input]),
/// strictly increasing in the monotone input.
class MapComponent {
 public:
  MapComponent() = default;
  MapComponent(std::size_t index, std::size_t monotone_input, std::vector<NonmonotonePart> nonmonotone,
               UnivariateFunction monotone, double constant);

  static MapComponent identity(std::size_t index, std::size_t monotone_input);

  std::size_t index() const { return index_; }
  std::size_t monotone_input() const { return monotone_input_; }
  /// Sorted input positions; the monotone input is last.
  const std::vector<std::size_t>& active_inputs() const { return active_; }
  const std::vector<NonmonotonePart>& nonmonotone() const { return nonmonotone_; }
  const UnivariateFunction& monotone() const { return monotone_; }
  double constant() const { return constant_; }

  /// Typical location and spread of the monotone input; used to seed the
  /// root-finding bracket during inversion.
  double reference_center() const { return reference_center_; }
  double reference_scale() const { return reference_scale_; }
  void set_reference(double center, double scale);

  double evaluate(std::span<const double> inputs) const;
  double partial_last(std::span<const double> inputs) const;
  /// c + sum of the non-monotone parts; everything except u_k.
  double offset(std::span<const double> inputs) const;

  /// Solves U(inputs with monotone slot = xi) = target for xi.
  double solve_last(std::span<const double> inputs, double target) const;

  bool is_identity() const;

  bool operator==(const MapComponent&) const = default;

 private:
  void check_inputs(std::span<const double> inputs) const;

  std::size_t index_ = 0;
  std::size_t monotone_input_ = 0;
  std::vector<NonmonotonePart> nonmonotone_;
  UnivariateFunction monotone_;
  double constant_ = 0.0;
  std::vector<std::size_t> active_;
  double reference_center_ = 0.0;
  double reference_scale_ = 1.0;
};

/// Lower-triangular map R^{data_dim + n} -> R^n. Component k depends on the
/// data slots and on states 0..k only.
class TriangularMap {
 public:
  TriangularMap() = default;
  TriangularMap(std::size_t data_dim, std::vector<MapComponent> components);

  static TriangularMap identity(std::size_t n);

  std::size_t dimension() const { return components_.size(); }
  std::size_t data_dimension() const { return data_dim_; }
  std::size_t input_dimension() const { return data_dim_ + components_.size(); }
  const std::vector<MapComponent>& components() const { return components_; }
  const MapComponent& component(std::size_t k) const { return components_.at(k); }

  bool operator==(const TriangularMap&) const = default;

 private:
  std::size_t data_dim_ = 0;
  std::vector<MapComponent> components_;
};

double eval_component(const MapComponent& comp, std::span<const double> inputs);
double partial_last(const MapComponent& comp, std::span<const double> inputs);

/// Applies every component to the full input vector [data..., state...].
Eigen::VectorXd eval_map(const TriangularMap& map, std::span<const double> inputs);
Eigen::VectorXd eval_map(const TriangularMap& map, const Eigen::VectorXd& inputs);

/// Solves eval_map(map, [data, z]) = x for z, one component at a time.
Eigen::VectorXd invert_triangular(const TriangularMap& map, std::span<const double> x,
                                  std::span<const double> data = {});
Eigen::VectorXd invert_triangular(const TriangularMap& map, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& data = Eigen::VectorXd());

/// log of the pullback of N(0, I) through the map at z (map without data slots).
double log_pullback_density(const TriangularMap& map, std::span<const double> z);
double log_pullback_density(const TriangularMap& map, const Eigen::VectorXd& z);

/// Gradient of log_pullback_density with respect to z. Uses the separable
/// structure: the Jacobian of component k has entries u_i'(z_i).
Eigen::VectorXd log_pullback_gradient(const TriangularMap& map, std::span<const double> z);

/// Root of the increasing function g(x) = target, bracketed outward from
/// center +- 10 scale and refined by safeguarded Newton.
double solve_increasing(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                        double target, double center, double scale, std::size_t component = 0);

namespace inversion {
inline constexpr double kResidualTolerance = 1e-10;
inline constexpr int kMaxBracketDoublings = 60;
inline constexpr double kInitialBracketScales = 10.0;
}  // namespace inversion

}  // namespace tmap
