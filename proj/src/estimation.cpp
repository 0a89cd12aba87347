#include "tmap/estimation.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "design.hpp"
#include "optim.hpp"

namespace tmap {

std::string to_string(MonotoneScope scope) {
  switch (scope) {
    case MonotoneScope::none: return "none";
    case MonotoneScope::first_component: return "first_component";
    case MonotoneScope::all_components: return "all_components";
  }
  return "unknown";
}

MonotoneScope monotone_scope_from_string(const std::string& name) {
  for (auto s : {MonotoneScope::none, MonotoneScope::first_component, MonotoneScope::all_components}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown monotone scope '" + name + "'");
}

bool MapSpec::sigmoid_monotone(std::size_t k) const {
  if (p <= 0) return false;
  switch (nonlinear_monotone) {
    case MonotoneScope::none: return false;
    case MonotoneScope::first_component: return k == 0;
    case MonotoneScope::all_components: return true;
  }
  return false;
}

bool FitReport::all_converged() const {
  if (!converged) return false;
  for (const auto& c : components) {
    if (!c.converged) return false;
  }
  return true;
}

RegressionResult fit_regression_path(const Eigen::VectorXd& last, const Eigen::MatrixXd& features) {
  const Eigen::Index m = last.size();
  if (features.rows() != m) throw ArgumentError("regression: feature rows do not match sample count");
  const Eigen::Index f = features.cols();
  Eigen::MatrixXd a(m, f + 1);
  a.leftCols(f) = features;
  a.col(f).setOnes();

  RegressionResult r;
  Eigen::MatrixXd gram = a.transpose() * a / static_cast<double>(m);
  const Eigen::VectorXd rhs = -a.transpose() * last / static_cast<double>(m);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13) {
    gram.diagonal().array() += kRegressionRidge;
    ldlt.compute(gram);
    r.regularized = true;
  }
  const Eigen::VectorXd sol = ldlt.solve(rhs);
  const Eigen::VectorXd residual = a * sol + last;
  r.kappa = residual.squaredNorm() / static_cast<double>(m);
  if (!(r.kappa > kKappaFloor)) {
    r.kappa = kKappaFloor;
    r.degenerate_residual = true;
  }
  r.alpha = 1.0 / std::sqrt(r.kappa);
  r.coefficients = sol.head(f) * r.alpha;
  r.constant = sol[f] * r.alpha;
  r.objective = 0.5 * r.alpha * r.alpha * (residual.squaredNorm() / static_cast<double>(m)) - std::log(r.alpha);
  return r;
}

double component_objective(const MapComponent& comp, const Eigen::MatrixXd& samples) {
  double total = 0.0;
  std::vector<double> row(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) row[j] = samples(i, j);
    const double u = comp.evaluate(row);
    const double d = comp.partial_last(row);
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    total += 0.5 * u * u - std::log(d);
  }
  return total / static_cast<double>(samples.rows());
}

FittedComponent fit_component(const Eigen::MatrixXd& samples, std::size_t index, std::span<const std::size_t> active,
                              std::size_t data_dim, const MapSpec& spec, const ComponentFitOptions& options) {
  if (active.empty() || active.back() != data_dim + index) {
    throw ArgumentError("component " + std::to_string(index) + ": last active input must be its own position");
  }
  const auto design = detail::make_design(samples, index, active, spec, spec.sigmoid_monotone(index), true);
  const Eigen::Index m = samples.rows();
  const auto np = static_cast<Eigen::Index>(design.parameter_count());
  if (m < np) {
    throw InsufficientSamplesError("component " + std::to_string(index) + " has " + std::to_string(np) +
                                   " coefficients but only " + std::to_string(m) + " samples");
  }

  Eigen::MatrixXd values;
  Eigen::MatrixXd dlast;
  design.evaluate(samples, values, dlast);
  const double log_scale = std::log(design.scale.back());

  ComponentReport report;
  report.index = index;

  if (design.affine_monotone() && !options.force_iterative) {
    const Eigen::Index nf = static_cast<Eigen::Index>(design.offdiag.size());
    const auto reg = fit_regression_path(values.col(design.monotone_begin()), values.leftCols(nf));
    Eigen::VectorXd theta(np);
    theta.head(nf) = reg.coefficients;
    theta[design.constant_slot()] = reg.constant;
    theta[design.monotone_begin()] = reg.alpha;
    report.objective = reg.objective + log_scale;
    report.used_closed_form = true;
    report.regularized = reg.regularized;
    report.degenerate_residual = reg.degenerate_residual;
    return {design.to_component(theta), report};
  }

  const std::size_t mono0 = design.monotone_begin();
  const auto nk = static_cast<Eigen::Index>(design.monotone.size());
  const Eigen::MatrixXd gram = values.transpose() * values / static_cast<double>(m);
  std::vector<bool> nonnegative(static_cast<std::size_t>(np), false);
  for (std::size_t j = mono0; j < static_cast<std::size_t>(np); ++j) nonnegative[j] = true;

  auto objective = [&](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd d = dlast * theta.tail(nk);
    if (!(d.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd u = values * theta;
    return 0.5 * u.squaredNorm() / static_cast<double>(m) - d.array().log().mean();
  };
  auto derivatives = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    const Eigen::VectorXd d = dlast * theta.tail(nk);
    const Eigen::VectorXd u = values * theta;
    const Eigen::ArrayXd inv = d.array().inverse();
    g = values.transpose() * u / static_cast<double>(m);
    g.tail(nk) -= dlast.transpose() * inv.matrix() / static_cast<double>(m);
    h = gram;
    h.bottomRightCorner(nk, nk) +=
        dlast.transpose() * (inv.square().matrix().asDiagonal() * dlast) / static_cast<double>(m);
  };

  optim::NewtonOptions opts;
  opts.gradient_tolerance = options.gradient_tolerance;
  opts.max_iterations = options.max_iterations;
  opts.stall_tolerance = options.stall_tolerance;
  const auto res = optim::projected_newton(objective, derivatives, nonnegative, design.identity_parameters(), opts);

  report.objective = res.value + log_scale;
  report.iterations = res.iterations;
  report.converged = res.converged;
  report.stalled = res.stalled;
  report.gradient_norm = res.gradient_norm;
  if (!res.converged) {
    std::ostringstream msg;
    msg << "component " << index << ": projected Newton did not converge after " << res.iterations
        << " iterations (objective " << report.objective << ", projected gradient " << res.gradient_norm << ")";
    throw FitNonconvergence(msg.str(), report);
  }
  return {design.to_component(res.x), report};
}

FittedMap fit_map(const Eigen::MatrixXd& samples, const MapSpec& spec, const SparsityPattern& sparsity,
                  const ComponentFitOptions& options, bool parallel) {
  sparsity.validate();
  const std::size_t n = sparsity.dimension();
  const std::size_t dd = sparsity.data_dim;
  if (static_cast<std::size_t>(samples.cols()) != dd + n) {
    throw ArgumentError("fit_map: samples have " + std::to_string(samples.cols()) + " columns, sparsity expects " +
                        std::to_string(dd + n));
  }
  std::vector<MapComponent> comps(n);
  FitReport report;
  report.components.resize(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t k = 0; k < n; ++k) {
    try {
      if (sparsity.is_identity(k)) {
        comps[k] = MapComponent::identity(k, dd + k);
        report.components[k].index = k;
        report.components[k].identity = true;
      } else {
        auto fitted = fit_component(samples, k, sparsity.active[k], dd, spec, options);
        comps[k] = std::move(fitted.component);
        report.components[k] = fitted.report;
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return {TriangularMap(dd, std::move(comps)), std::move(report)};
}

}  // namespace tmap
