#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tmap/basis.hpp"
#include "tmap/estimation.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap::detail {

/// Basis layout of one separable component in standardized inputs.
/// Parameters are ordered [off-diagonal features..., constant, monotone features...].
struct ComponentDesign {
  struct Feature {
    std::size_t slot = 0;  // index into active
    BasisFunction basis;
  };

  std::size_t index = 0;
  std::vector<std::size_t> active;
  std::vector<double> shift;
  std::vector<double> scale;
  std::vector<Feature> offdiag;
  std::vector<BasisFunction> monotone;

  std::size_t parameter_count() const { return offdiag.size() + 1 + monotone.size(); }
  std::size_t constant_slot() const { return offdiag.size(); }
  std::size_t monotone_begin() const { return offdiag.size() + 1; }
  bool affine_monotone() const {
    return monotone.size() == 1 && monotone[0].kind == BasisKind::linear;
  }

  /// Identity in standardized coordinates (the identity of the raw inputs
  /// when the design is unstandardized).
  Eigen::VectorXd identity_parameters() const;

  /// values: M x P basis values; last_derivatives: M x K monotone derivatives.
  void evaluate(const Eigen::MatrixXd& samples, Eigen::MatrixXd& values, Eigen::MatrixXd& last_derivatives) const;

  /// Composes the standardization into a component of the raw inputs.
  MapComponent to_component(const Eigen::VectorXd& theta, double output_shift = 0.0,
                            double output_scale = 1.0) const;
};

ComponentDesign make_design(const Eigen::MatrixXd& samples, std::size_t index, std::span<const std::size_t> active,
                            const MapSpec& spec, bool sigmoid_monotone, bool standardize);

}  // namespace tmap::detail
