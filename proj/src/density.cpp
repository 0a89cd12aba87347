#include "tmap/density.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "design.hpp"
#include "optim.hpp"
#include "tmap/centers.hpp"
#include "tmap/rng.hpp"

namespace tmap {

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_upper_quantile(double q) {
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), q));
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw ArgumentError("grid needs at least two points on a nonempty interval");
  std::vector<double> g(count);
  const double h = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + h * static_cast<double>(i);
  g.back() = hi;
  return g;
}

CdfGrid cdf_on_grid(const std::function<double(double)>& log_density, std::vector<double> points) {
  if (points.size() < 2) throw ArgumentError("CDF grid needs at least two points");
  if (!std::is_sorted(points.begin(), points.end())) throw ArgumentError("CDF grid must be increasing");
  const std::size_t n = points.size();
  std::vector<double> logp(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    logp[i] = log_density(points[i]);
    if (std::isnan(logp[i])) throw ArgumentError("log density is NaN on the grid");
    top = std::max(top, logp[i]);
  }
  if (!std::isfinite(top)) throw DegeneracyError("density vanishes on the whole grid");

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(logp[i] - top);
  std::vector<double> left(n, 0.0);
  std::vector<double> right(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) left[i] = left[i - 1] + 0.5 * (points[i] - points[i - 1]) * (w[i] + w[i - 1]);
  for (std::size_t i = n - 1; i-- > 0;) {
    right[i] = right[i + 1] + 0.5 * (points[i + 1] - points[i]) * (w[i] + w[i + 1]);
  }
  const double total = left.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw DegeneracyError("density normalizer is not positive");

  CdfGrid g;
  g.points = std::move(points);
  g.cdf.resize(n);
  g.upper.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.cdf[i] = std::min(1.0, left[i] / total);
    g.upper[i] = std::min(1.0, right[i] / total);
  }
  g.log_normalizer = top + std::log(total);
  return g;
}

Eigen::MatrixXd reference_samples(std::size_t count, std::size_t dimension, std::uint64_t seed) {
  auto rng = make_stream(seed, 0, StreamTag::reference_samples);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dimension));
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = rng.normal();
  return z;
}

namespace {

struct Block {
  detail::ComponentDesign design;
  Eigen::MatrixXd values;
  Eigen::MatrixXd dlast;
  Eigen::Index offset = 0;  // into the stacked parameter vector
};

}  // namespace

FittedMap fit_map_from_density(const UnnormalizedLogDensity& target, const Eigen::MatrixXd& reference,
                               const MapSpec& spec, const SparsityPattern& sparsity,
                               const DensityFitOptions& options) {
  sparsity.validate();
  if (sparsity.data_dim != 0) throw ArgumentError("density-targeted maps have no data slots");
  const std::size_t n = sparsity.dimension();
  if (target.dimension != n || static_cast<std::size_t>(reference.cols()) != n) {
    throw ArgumentError("target, reference samples and sparsity disagree on the dimension");
  }
  if (!target.log_density) throw ArgumentError("target has no log density");
  const Eigen::Index m = reference.rows();
  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd shift = options.output_shift.size() == nn ? options.output_shift : Eigen::VectorXd::Zero(nn);
  const Eigen::VectorXd scale = options.output_scale.size() == nn ? options.output_scale : Eigen::VectorXd::Ones(nn);
  if (!(scale.minCoeff() > 0.0)) throw ArgumentError("output scales must be positive");

  std::vector<Block> blocks;
  std::vector<std::size_t> block_of(n, static_cast<std::size_t>(-1));
  Eigen::Index total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (sparsity.is_identity(k)) continue;
    Block b;
    b.design = detail::make_design(reference, k, sparsity.active[k], spec, spec.sigmoid_monotone(k), false);
    b.design.evaluate(reference, b.values, b.dlast);
    b.offset = total;
    total += static_cast<Eigen::Index>(b.design.parameter_count());
    block_of[k] = blocks.size();
    blocks.push_back(std::move(b));
  }
  if (m < total) {
    throw InsufficientSamplesError("density fit has " + std::to_string(total) + " coefficients but only " +
                                   std::to_string(m) + " reference samples");
  }

  // Monotone coefficients are stored as logs, so every iterate is monotone.
  auto unpack = [&](const Block& b, const Eigen::VectorXd& phi) {
    const auto np = static_cast<Eigen::Index>(b.design.parameter_count());
    Eigen::VectorXd theta = phi.segment(b.offset, np);
    const auto m0 = static_cast<Eigen::Index>(b.design.monotone_begin());
    theta.tail(np - m0) = theta.tail(np - m0).array().exp().matrix();
    return theta;
  };

  const double log_scale_sum = scale.array().log().sum();
  Eigen::MatrixXd x(m, nn);
  Eigen::MatrixXd grad_target(m, nn);
  std::vector<double> buffer(n);
  std::vector<double> gbuf(n);

  auto push = [&](const Eigen::VectorXd& phi, std::vector<Eigen::VectorXd>& dlogs) -> bool {
    dlogs.assign(n, Eigen::VectorXd());
    for (std::size_t k = 0; k < n; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      if (block_of[k] == static_cast<std::size_t>(-1)) {
        x.col(kk) = shift[kk] + scale[kk] * reference.col(kk).array();
        continue;
      }
      const Block& b = blocks[block_of[k]];
      const Eigen::VectorXd theta = unpack(b, phi);
      const auto nk = static_cast<Eigen::Index>(b.design.monotone.size());
      x.col(kk) = (shift[kk] + scale[kk] * (b.values * theta).array()).matrix();
      dlogs[k] = b.dlast * theta.tail(nk);
      if (!(dlogs[k].minCoeff() > 0.0)) return false;
    }
    return true;
  };

  auto objective = [&](const Eigen::VectorXd& phi) {
    std::vector<Eigen::VectorXd> d;
    if (!push(phi, d)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n; ++k) buffer[k] = x(i, static_cast<Eigen::Index>(k));
      const double lp = target.log_density(buffer);
      if (!std::isfinite(lp)) return std::numeric_limits<double>::infinity();
      sum += lp;
    }
    for (const auto& dk : d) {
      if (dk.size() > 0) sum += dk.array().log().sum();
    }
    return -(sum / static_cast<double>(m) + log_scale_sum);
  };

  auto target_gradient = [&](std::span<const double> at, std::span<double> out) {
    if (target.gradient) {
      target.gradient(at, out);
      return;
    }
    std::vector<double> probe(at.begin(), at.end());
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(at[j]));
      probe[j] = at[j] + h;
      const double fp = target.log_density(probe);
      probe[j] = at[j] - h;
      const double fm = target.log_density(probe);
      probe[j] = at[j];
      out[j] = (fp - fm) / (2.0 * h);
    }
  };

  auto gradient = [&](const Eigen::VectorXd& phi, Eigen::VectorXd& g) {
    g.setZero(phi.size());
    std::vector<Eigen::VectorXd> d;
    push(phi, d);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n; ++k) buffer[k] = x(i, static_cast<Eigen::Index>(k));
      target_gradient(buffer, gbuf);
      for (std::size_t k = 0; k < n; ++k) grad_target(i, static_cast<Eigen::Index>(k)) = gbuf[k];
    }
    for (const auto& b : blocks) {
      const auto k = static_cast<Eigen::Index>(b.design.index);
      const auto np = static_cast<Eigen::Index>(b.design.parameter_count());
      const auto m0 = static_cast<Eigen::Index>(b.design.monotone_begin());
      const Eigen::VectorXd theta = unpack(b, phi);
      Eigen::VectorXd gt = scale[k] * (b.values.transpose() * grad_target.col(k));
      gt.tail(np - m0) += b.dlast.transpose() * d[b.design.index].cwiseInverse();
      gt /= -static_cast<double>(m);
      gt.tail(np - m0) = gt.tail(np - m0).cwiseProduct(theta.tail(np - m0));
      g.segment(b.offset, np) = gt;
    }
  };

  Eigen::VectorXd phi0(total);
  for (const auto& b : blocks) {
    const auto np = static_cast<Eigen::Index>(b.design.parameter_count());
    const auto m0 = static_cast<Eigen::Index>(b.design.monotone_begin());
    Eigen::VectorXd theta = b.design.identity_parameters();
    for (Eigen::Index j = m0; j < np; ++j) theta[j] = std::log(theta[j] > 0.0 ? theta[j] : 1e-3);
    phi0.segment(b.offset, np) = theta;
  }

  FittedMap out;
  out.report.components.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.report.components[k].index = k;
    out.report.components[k].identity = block_of[k] == static_cast<std::size_t>(-1);
  }

  optim::Result res;
  if (total > 0) {
    if (!std::isfinite(objective(phi0))) {
      throw ArgumentError("target log density is not finite at the initial reference push-forward");
    }
    optim::BfgsOptions opts;
    opts.gradient_tolerance = options.gradient_tolerance;
    opts.max_iterations = options.max_iterations;
    opts.stall_tolerance = options.stall_tolerance;
    res = optim::bfgs(objective, gradient, phi0, opts);
  } else {
    res.x = phi0;
    res.value = objective(phi0);
    res.history = {res.value};
    res.converged = true;
  }
  out.report.objective_history = res.history;
  out.report.iterations = res.iterations;
  out.report.converged = res.converged;
  for (auto& c : out.report.components) {
    c.objective = res.value;
    c.iterations = res.iterations;
    c.converged = res.converged;
    c.stalled = res.stalled;
    c.gradient_norm = res.gradient_norm;
  }
  if (!res.converged) {
    std::ostringstream msg;
    msg << "density-targeted fit did not converge after " << res.iterations << " iterations (best objective "
        << res.value << ", gradient " << res.gradient_norm << ")";
    throw FitNonconvergence(msg.str(), out.report.components.empty() ? ComponentReport{} : out.report.components[0]);
  }

  std::vector<MapComponent> comps;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (block_of[k] == static_cast<std::size_t>(-1)) {
      comps.emplace_back(k, k, std::vector<NonmonotonePart>{}, UnivariateFunction::linear(scale[kk], true), shift[kk]);
    } else {
      const Block& b = blocks[block_of[k]];
      comps.push_back(b.design.to_component(unpack(b, res.x), shift[kk], scale[kk]));
    }
  }
  out.map = TriangularMap(0, std::move(comps));
  return out;
}

FittedMap fit_map_from_density(const UnnormalizedLogDensity& target, std::size_t count, const MapSpec& spec,
                               const SparsityPattern& sparsity, std::uint64_t seed, const DensityFitOptions& options) {
  return fit_map_from_density(target, reference_samples(count, target.dimension, seed), spec, sparsity, options);
}

ScalarRearrangement fit_scalar_rearrangement(const std::function<double(double)>& log_density,
                                             std::vector<double> grid, const MapSpec& spec) {
  ScalarRearrangement out;
  out.grid = cdf_on_grid(log_density, std::move(grid));
  const auto& g = out.grid;

  std::vector<double> xi;
  std::vector<double> x;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    if (g.cdf[i] < kTailMass || g.upper[i] < kTailMass) {
      ++out.dropped_points;
      continue;
    }
    xi.push_back(g.cdf[i] <= 0.5 ? normal_quantile(g.cdf[i]) : normal_upper_quantile(g.upper[i]));
    x.push_back(g.points[i]);
  }
  const auto m = static_cast<Eigen::Index>(xi.size());
  if (m < spec.p + 3) throw InsufficientSamplesError("too few usable grid points for the scalar rearrangement");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), m);

  if (spec.p <= 0) {
    Eigen::MatrixXd a(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) a.row(i) << 1.0, xi[i];
    const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(xv);
    if (!(sol[1] > 0.0)) throw MonotonicityError("scalar rearrangement has a non-positive slope");
    out.map = UnivariateFunction({{sol[0], BasisFunction::constant()}, {sol[1], BasisFunction::linear()}}, true);
    return out;
  }

  // Centers at standard normal quantiles: the inputs are reference draws.
  const int count = spec.p + 2;
  std::vector<double> centers(count);
  for (int j = 0; j < count; ++j) centers[j] = normal_quantile((j + 1.0) / (spec.p + 3.0));
  std::vector<BasisFunction> bases;
  for (int j = 0; j < count; ++j) {
    const double s = spec.gamma * (centers[std::min(j + 1, count - 1)] - centers[std::max(j - 1, 0)]) / 2.0;
    if (j == 0) {
      bases.push_back(BasisFunction::sigmoid_left(centers[j], s));
    } else if (j == count - 1) {
      bases.push_back(BasisFunction::sigmoid_right(centers[j], s));
    } else {
      bases.push_back(BasisFunction::sigmoid_bump(centers[j], s));
    }
  }
  Eigen::MatrixXd a(m, count + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    for (int j = 0; j < count; ++j) a(i, j + 1) = bases[j].value(xi[i]);
  }
  const Eigen::MatrixXd gram = a.transpose() * a / static_cast<double>(m);
  const Eigen::VectorXd atx = a.transpose() * xv / static_cast<double>(m);
  const double xx = xv.squaredNorm() / static_cast<double>(m);
  auto objective = [&](const Eigen::VectorXd& t) { return 0.5 * (t.dot(gram * t) - 2.0 * t.dot(atx) + xx); };
  auto derivatives = [&](const Eigen::VectorXd& t, Eigen::VectorXd& grad, Eigen::MatrixXd& h) {
    grad = gram * t - atx;
    h = gram;
  };
  std::vector<bool> nonnegative(count + 1, true);
  nonnegative[0] = false;
  Eigen::VectorXd t0 = Eigen::VectorXd::Zero(count + 1);
  t0[1] = 1.0;
  t0[count] = 1.0;
  optim::NewtonOptions opts;
  opts.gradient_tolerance = 1e-10 * std::max(1.0, xv.cwiseAbs().maxCoeff());
  opts.stall_tolerance = 1e-6 * std::max(1.0, xv.cwiseAbs().maxCoeff());
  const auto res = optim::projected_newton(objective, derivatives, nonnegative, t0, opts);
  if (!res.converged) throw NonconvergenceError("scalar rearrangement regression did not converge", 0);

  std::vector<Term> terms{{res.x[0], BasisFunction::constant()}};
  double slope_mass = 0.0;
  for (int j = 0; j < count; ++j) {
    terms.push_back({res.x[j + 1], bases[j]});
    slope_mass += res.x[j + 1];
  }
  if (!(res.x[1] > 0.0 || res.x[count] > 0.0) || !(slope_mass > 0.0)) {
    throw MonotonicityError("scalar rearrangement is not strictly increasing");
  }
  out.map = UnivariateFunction(std::move(terms), true);
  return out;
}

}  // namespace tmap
