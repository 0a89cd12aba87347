#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tmap/error.hpp"
#include "tmap/sparsity.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {

/// Which components get an erf-sigmoid monotone part instead of an affine one.
enum class MonotoneScope { none, first_component, all_components };

std::string to_string(MonotoneScope scope);
MonotoneScope monotone_scope_from_string(const std::string& name);

/// Every non-monotone part is a linear term plus p Gaussian RBFs. Components
/// selected by nonlinear_monotone (when p > 0) use p + 2 sigmoids in their
/// last variable; the rest are affine in it.
struct MapSpec {
  int p = 0;
  double gamma = 2.0;
  MonotoneScope nonlinear_monotone = MonotoneScope::first_component;

  bool sigmoid_monotone(std::size_t k) const;
};

struct ComponentFitOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
  double stall_tolerance = 1e-5;
  /// Use projected Newton even when the closed form applies.
  bool force_iterative = false;
};

struct ComponentReport {
  std::size_t index = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  bool stalled = false;
  double gradient_norm = 0.0;
  bool used_closed_form = false;
  bool identity = false;
  bool regularized = false;
  bool degenerate_residual = false;
};

struct FitReport {
  std::vector<ComponentReport> components;
  /// Filled by the density-targeted fit: objective after each accepted step.
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = true;

  bool all_converged() const;
};

class FitNonconvergence : public NonconvergenceError {
 public:
  FitNonconvergence(const std::string& what, ComponentReport report)
      : NonconvergenceError(what, report.index), report_(report) {}
  const ComponentReport& report() const { return report_; }

 private:
  ComponentReport report_;
};

struct FittedComponent {
  MapComponent component;
  ComponentReport report;
};

struct FittedMap {
  TriangularMap map;
  FitReport report;
};

struct RegressionResult {
  Eigen::VectorXd coefficients;
  double constant = 0.0;
  double alpha = 1.0;
  double kappa = 1.0;
  double objective = 0.0;
  bool regularized = false;
  bool degenerate_residual = false;
};

inline constexpr double kKappaFloor = 1e-12;
inline constexpr double kRegressionRidge = 1e-8;

/// Closed-form minimizer when the last variable enters affinely:
/// U = features * coefficients + constant + alpha * last.
RegressionResult fit_regression_path(const Eigen::VectorXd& last, const Eigen::MatrixXd& features);

/// samples: M x input_dimension, columns indexed by input position. The last
/// entry of active is the monotone input, data_dim + index.
FittedComponent fit_component(const Eigen::MatrixXd& samples, std::size_t index, std::span<const std::size_t> active,
                              std::size_t data_dim, const MapSpec& spec, const ComponentFitOptions& options = {});

/// Mean of U^2 / 2 - log dU/dz_k over the rows of samples.
double component_objective(const MapComponent& comp, const Eigen::MatrixXd& samples);

/// Fits every component independently; parallel over components unless
/// parallel is false. Errors carry the failing component index.
FittedMap fit_map(const Eigen::MatrixXd& samples, const MapSpec& spec, const SparsityPattern& sparsity,
                  const ComponentFitOptions& options = {}, bool parallel = true);

}  // namespace tmap
