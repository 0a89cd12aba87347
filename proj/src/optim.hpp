#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace tmap::optim {

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  double gradient_norm = 0.0;
  std::vector<double> history;
};

/// Objective returns +inf outside its domain; line searches back off from it.
using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;
using GradientHessian = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

struct NewtonOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
  /// A failed line search still counts as convergence below this gradient norm.
  double stall_tolerance = 1e-5;
};

/// Projected Newton for min f(x) subject to x_i >= 0 for flagged i.
Result projected_newton(const Objective& f, const GradientHessian& derivatives, const std::vector<bool>& nonnegative,
                        Eigen::VectorXd x0, const NewtonOptions& options = {});

struct BfgsOptions {
  double gradient_tolerance = 1e-6;
  int max_iterations = 1000;
  double stall_tolerance = 1e-4;
};

/// Unconstrained BFGS with Armijo backtracking. Accepted steps never increase
/// the objective, so history is nonincreasing.
Result bfgs(const Objective& f, const Gradient& gradient, Eigen::VectorXd x0, const BfgsOptions& options = {});

}  // namespace tmap::optim
