#include "tmap/filters.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "tmap/density.hpp"
#include "tmap/error.hpp"

namespace tmap {

namespace {

constexpr double kGainRidge = 1e-10;

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& x, const std::vector<std::size_t>& order) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t k = 0; k < order.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(order[k]));
  return out;
}

Eigen::MatrixXd unpermute_columns(const Eigen::MatrixXd& x, const std::vector<std::size_t>& order) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t k = 0; k < order.size(); ++k) out.col(static_cast<Eigen::Index>(order[k])) = x.col(static_cast<Eigen::Index>(k));
  return out;
}

void check_observation(const Ensemble& ens, const ScalarObservation& obs) {
  ens.validate();
  if (obs.index >= ens.dimension()) throw ArgumentError("observed index out of range");
}

bool parallel(const FilterConfig& cfg) { return cfg.execution == Execution::parallel; }

}  // namespace

void Ensemble::validate() const {
  if (states.rows() < 2) throw ArgumentError("an ensemble needs at least two particles");
  if (states.cols() < 1) throw ArgumentError("ensemble states have no columns");
  if (simulated_obs && simulated_obs->rows() != states.rows()) {
    throw ArgumentError("simulated observations do not match the ensemble size");
  }
  if (weights) {
    if (weights->size() != states.rows()) throw ArgumentError("weights do not match the ensemble size");
    if (weights->minCoeff() < 0.0 || std::abs(weights->sum() - 1.0) > 1e-9) {
      throw ArgumentError("weights must be nonnegative and sum to one");
    }
  }
}

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::enkf: return "enkf";
    case FilterKind::stochastic_map: return "stochastic_map";
    case FilterKind::deterministic_map: return "deterministic_map";
    case FilterKind::deterministic_local: return "deterministic_local";
    case FilterKind::sir: return "sir";
  }
  return "unknown";
}

FilterKind filter_kind_from_string(const std::string& name) {
  for (auto k : {FilterKind::enkf, FilterKind::stochastic_map, FilterKind::deterministic_map,
                 FilterKind::deterministic_local, FilterKind::sir}) {
    if (to_string(k) == name) return k;
  }
  throw ArgumentError("unknown filter kind '" + name + "'");
}

std::string to_string(Topology topology) { return topology == Topology::line ? "line" : "cycle"; }

Topology topology_from_string(const std::string& name) {
  if (name == "line") return Topology::line;
  if (name == "cycle") return Topology::cycle;
  throw ArgumentError("unknown topology '" + name + "'");
}

void FilterConfig::validate() const {
  if (p < 0) throw ArgumentError("p must be nonnegative");
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  if (!(inflation >= 1.0)) throw ArgumentError("inflation must be at least 1");
  if (radius && !(*radius >= 0.0)) throw ArgumentError("localization radius must be nonnegative");
  if (identity_cutoff && *identity_cutoff < 1) throw ArgumentError("identity cutoff must be at least 1");
  if (enkf_radius && !(*enkf_radius > 0.0)) throw ArgumentError("EnKF localization radius must be positive");
  if (grid_points < 3) throw ArgumentError("rearrangement grid needs at least three points");
}

MapSpec FilterConfig::map_spec() const { return MapSpec{p, gamma, nonlinear_monotone}; }

Distance FilterConfig::state_distance(std::size_t n) const {
  if (distance) return distance;
  if (topology == Topology::cycle) return cycle_distance(n);
  return line_distance;
}

std::vector<ScalarObservation> scalar_observations(const ObservationSpec& obs, const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(y.size()) != obs.count()) throw ArgumentError("observation dimension mismatch");
  std::vector<ScalarObservation> out;
  for (std::size_t j = 0; j < obs.count(); ++j) out.push_back({y[static_cast<Eigen::Index>(j)], obs.indices[j], obs.noise});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

double gaspari_cohn(double distance, double c) {
  if (!(c > 0.0)) throw ArgumentError("Gaspari-Cohn radius must be positive");
  const double z = std::abs(distance) / c;
  if (z >= 2.0) return 0.0;
  if (z <= 1.0) return (((-0.25 * z + 0.5) * z + 0.625) * z - 5.0 / 3.0) * z * z + 1.0;
  return ((((z / 12.0 - 0.5) * z + 0.625) * z + 5.0 / 3.0) * z - 5.0) * z + 4.0 - 2.0 / (3.0 * z);
}

Eigen::MatrixXd inflate(const Eigen::MatrixXd& states, double zeta) {
  if (!(zeta >= 1.0)) throw ArgumentError("inflation must be at least 1");
  if (zeta == 1.0) return states;
  const Eigen::RowVectorXd mean = states.colwise().mean();
  return (zeta * (states.rowwise() - mean)).rowwise() + mean;
}

Ensemble inflate(const Ensemble& ens, double zeta) {
  Ensemble out = ens;
  out.states = inflate(ens.states, zeta);
  return out;
}

std::vector<std::size_t> distance_ordering(const Distance& distance, std::size_t n, std::size_t observed) {
  if (observed >= n) throw ArgumentError("observed index out of range");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = i == observed ? -1.0 : distance(observed, i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  return order;
}

SparsityPattern analysis_sparsity(const FilterConfig& cfg, const Distance& distance,
                                  const std::vector<std::size_t>& order, std::size_t data_dim) {
  const std::size_t n = order.size();
  std::optional<std::size_t> cutoff;
  if (cfg.identity_cutoff && *cfg.identity_cutoff < n) cutoff = cfg.identity_cutoff;
  const double r = cfg.radius.value_or(std::numeric_limits<double>::infinity());
  const Distance permuted = [&](std::size_t a, std::size_t b) { return distance(order[a], order[b]); };
  const auto pattern = distance_sparsity(permuted, n, r, cutoff);
  return data_dim == 0 ? pattern : with_data_slots(pattern, data_dim, cfg.data_to_all_components);
}

Ensemble stochastic_map_analysis(const Ensemble& ens, const ScalarObservation& obs, const FilterConfig& cfg,
                                 Xoshiro256& rng) {
  check_observation(ens, obs);
  cfg.validate();
  const auto m = static_cast<Eigen::Index>(ens.size());
  const std::size_t n = ens.dimension();
  const auto l = static_cast<Eigen::Index>(obs.index);
  const Eigen::MatrixXd& x = ens.states;

  Eigen::VectorXd y(m);
  if (ens.simulated_obs) {
    if (ens.simulated_obs->cols() != 1) throw ArgumentError("scalar analysis expects one simulated observation per particle");
    y = ens.simulated_obs->col(0);
  } else {
    for (Eigen::Index i = 0; i < m; ++i) y[i] = x(i, l) + obs.noise.sample(rng);
  }
  const Eigen::VectorXd eps = y - x.col(l);

  const Distance distance = cfg.state_distance(n);
  const auto order = distance_ordering(distance, n, obs.index);

  // The fitting copy is inflated; its simulated observations reuse the same
  // noise draws so the transported pairs (y, x) stay matched.
  const Eigen::MatrixXd fit_states = inflate(x, cfg.inflation);
  Eigen::MatrixXd samples(m, static_cast<Eigen::Index>(n) + 1);
  samples.col(0) = fit_states.col(l) + eps;
  samples.rightCols(static_cast<Eigen::Index>(n)) = permute_columns(fit_states, order);

  const auto sparsity = analysis_sparsity(cfg, distance, order, 1);
  const auto fitted = fit_map(samples, cfg.map_spec(), sparsity, {}, parallel(cfg));

  Eigen::MatrixXd inputs(m, static_cast<Eigen::Index>(n) + 1);
  inputs.col(0) = y;
  inputs.rightCols(static_cast<Eigen::Index>(n)) = permute_columns(x, order);
  const Eigen::MatrixXd z =
      conditional_transport(fitted.map, inputs, Eigen::VectorXd::Constant(1, obs.value), cfg.execution);

  Ensemble out;
  out.states = unpermute_columns(z, order);
  return out;
}

Ensemble enkf_analysis(const Ensemble& ens, std::span<const ScalarObservation> obs, const FilterConfig& cfg,
                       Xoshiro256& rng) {
  ens.validate();
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(obs.size());
  Ensemble out;
  out.states = ens.states;
  if (d == 0) return out;
  const auto m = static_cast<Eigen::Index>(ens.size());
  const std::size_t n = ens.dimension();
  const Eigen::MatrixXd& x = ens.states;
  for (const auto& o : obs) check_observation(ens, o);

  Eigen::MatrixXd hx(m, d);
  Eigen::VectorXd ystar(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    hx.col(j) = x.col(static_cast<Eigen::Index>(obs[j].index));
    ystar[j] = obs[j].value;
  }
  Eigen::MatrixXd y(m, d);
  if (ens.simulated_obs) {
    if (ens.simulated_obs->cols() != d) throw ArgumentError("simulated observations do not match the observation count");
    y = *ens.simulated_obs;
  } else {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) y(i, j) = hx(i, j) + obs[j].noise.sample(rng);
    }
  }
  const Eigen::MatrixXd eps = y - hx;

  const Eigen::MatrixXd fx = inflate(x, cfg.inflation);
  Eigen::MatrixXd fy(m, d);
  for (Eigen::Index j = 0; j < d; ++j) fy.col(j) = fx.col(static_cast<Eigen::Index>(obs[j].index)) + eps.col(j);
  const Eigen::MatrixXd ax = fx.rowwise() - fx.colwise().mean();
  const Eigen::MatrixXd ay = fy.rowwise() - fy.colwise().mean();
  Eigen::MatrixXd sxy = ax.transpose() * ay / static_cast<double>(m);
  Eigen::MatrixXd syy = ay.transpose() * ay / static_cast<double>(m);

  if (cfg.enkf_radius) {
    // Tapering the forecast covariance touches both the state-observation
    // and the observation-observation blocks.
    const Distance distance = cfg.state_distance(n);
    const double c = *cfg.enkf_radius;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) sxy(static_cast<Eigen::Index>(i), j) *= gaspari_cohn(distance(i, obs[j].index), c);
      for (Eigen::Index i = 0; i < d; ++i) syy(i, j) *= gaspari_cohn(distance(obs[i].index, obs[j].index), c);
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(syy);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0 ||
      ldlt.rcond() < std::numeric_limits<double>::epsilon()) {
    std::cerr << "warning: simulated-observation covariance is singular; adding ridge " << kGainRidge << "\n";
    syy.diagonal().array() += kGainRidge;
    ldlt.compute(syy);
  }
  // K = Sxy Syy^{-1}; Syy is symmetric so K^T = Syy^{-1} Sxy^T.
  const Eigen::MatrixXd gain_t = ldlt.solve(sxy.transpose());
  out.states = x - (y.rowwise() - ystar.transpose()) * gain_t;
  return out;
}

Ensemble deterministic_map_analysis(const Ensemble& ens, const ScalarObservation& obs, const FilterConfig& cfg,
                                    Xoshiro256& rng) {
  check_observation(ens, obs);
  cfg.validate();
  const std::size_t n = ens.dimension();
  const Distance distance = cfg.state_distance(n);
  const auto order = distance_ordering(distance, n, obs.index);
  const auto sparsity = analysis_sparsity(cfg, distance, order, 0);
  const MapSpec spec = cfg.map_spec();

  const Eigen::MatrixXd x = permute_columns(ens.states, order);
  const Eigen::MatrixXd fit_states = inflate(x, cfg.inflation);
  const TriangularMap forecast_map = fit_map(fit_states, spec, sparsity, {}, parallel(cfg)).map;

  UnnormalizedLogDensity target;
  target.dimension = n;
  target.log_density = [&](std::span<const double> xi) {
    return obs.log_likelihood(xi[0]) + log_pullback_density(forecast_map, xi);
  };
  target.gradient = [&](std::span<const double> xi, std::span<double> g) {
    const Eigen::VectorXd grad = log_pullback_gradient(forecast_map, xi);
    std::copy(grad.data(), grad.data() + grad.size(), g.begin());
    g[0] -= obs.noise.log_density_derivative(obs.value - xi[0]);
  };

  DensityFitOptions options;
  options.output_shift = fit_states.colwise().mean().transpose();
  options.output_scale =
      ((fit_states.rowwise() - fit_states.colwise().mean()).colwise().squaredNorm() / static_cast<double>(ens.size()))
          .cwiseSqrt()
          .transpose();
  for (Eigen::Index k = 0; k < options.output_scale.size(); ++k) {
    if (sparsity.is_identity(static_cast<std::size_t>(k))) {
      // Identity components must reproduce the particle exactly.
      options.output_shift[k] = 0.0;
      options.output_scale[k] = 1.0;
    } else if (!(options.output_scale[k] > 0.0)) {
      options.output_scale[k] = 1.0;
    }
  }
  const std::size_t count = cfg.reference_count > 0 ? cfg.reference_count : default_reference_count(ens.size());
  const TriangularMap analysis_map = fit_map_from_density(target, count, spec, sparsity, rng(), options).map;

  Ensemble out;
  out.states = unpermute_columns(composed_transport(forecast_map, analysis_map, x, cfg.execution), order);
  return out;
}

Ensemble deterministic_local_analysis(const Ensemble& ens, const ScalarObservation& obs, const FilterConfig& cfg) {
  check_observation(ens, obs);
  cfg.validate();
  const std::size_t n = ens.dimension();
  const auto m = static_cast<Eigen::Index>(ens.size());
  const Distance distance = cfg.state_distance(n);
  const auto order = distance_ordering(distance, n, obs.index);
  const auto sparsity = analysis_sparsity(cfg, distance, order, 0);
  const MapSpec spec = cfg.map_spec();

  const Eigen::MatrixXd x = permute_columns(ens.states, order);
  const TriangularMap forecast_map = fit_map(inflate(x, cfg.inflation), spec, sparsity, {}, parallel(cfg)).map;
  const MapComponent& first = forecast_map.component(0);

  Eigen::MatrixXd u(m, static_cast<Eigen::Index>(n));
  for_each_particle(ens.size(), cfg.execution, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    u.row(row) = eval_map(forecast_map, Eigen::VectorXd(x.row(row).transpose())).transpose();
  });

  // Posterior of the first reference coordinate: likelihood pulled back
  // through the first component times the standard normal.
  const Eigen::VectorXd u0 = u.col(0);
  const double sd = std::sqrt((u0.array() - u0.mean()).square().sum() / static_cast<double>(m - 1));
  const double pad = 6.0 * (sd > 0.0 ? sd : 1.0);
  const auto grid = uniform_grid(u0.minCoeff() - pad, u0.maxCoeff() + pad, cfg.grid_points);
  auto log_density = [&](double v) {
    const double xi = first.solve_last(std::span<const double>(&v, 1), v);
    return obs.log_likelihood(xi) - 0.5 * v * v;
  };
  const auto rearrangement = fit_scalar_rearrangement(log_density, grid, spec);

  Eigen::MatrixXd z(m, static_cast<Eigen::Index>(n));
  for_each_particle(ens.size(), cfg.execution, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::VectorXd target = u.row(row).transpose();
    target[0] = rearrangement.map.value(target[0]);
    z.row(row) = invert_triangular(forecast_map, target).transpose();
  });

  Ensemble out;
  out.states = unpermute_columns(z, order);
  return out;
}

Ensemble sequential_assimilate(const Ensemble& ens, std::vector<ScalarObservation> obs, const ScalarAnalysis& analysis) {
  std::vector<std::size_t> rank(obs.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return obs[a].index < obs[b].index; });
  const bool sliced = ens.simulated_obs && static_cast<std::size_t>(ens.simulated_obs->cols()) == obs.size();

  Ensemble current = ens;
  current.simulated_obs.reset();
  for (std::size_t k = 0; k < rank.size(); ++k) {
    const std::size_t j = rank[k];
    if (sliced) current.simulated_obs = Eigen::MatrixXd(ens.simulated_obs->col(static_cast<Eigen::Index>(j)));
    try {
      current = analysis(current, obs[j]);
    } catch (Error& e) {
      e.add_context("observation " + std::to_string(j) + " (state " + std::to_string(obs[j].index) + ")");
      throw;
    }
    current.simulated_obs.reset();
  }
  return current;
}

double effective_sample_size(const Eigen::VectorXd& weights) { return 1.0 / weights.squaredNorm(); }

SirResult sir_step(const Ensemble& ens, std::span<const ScalarObservation> obs, Xoshiro256& rng) {
  ens.validate();
  const auto m = static_cast<Eigen::Index>(ens.size());
  for (const auto& o : obs) check_observation(ens, o);

  Eigen::VectorXd logw(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double lw = ens.weights ? std::log((*ens.weights)[i]) : -std::log(static_cast<double>(m));
    for (const auto& o : obs) lw += o.log_likelihood(ens.states(i, static_cast<Eigen::Index>(o.index)));
    logw[i] = std::isnan(lw) ? -std::numeric_limits<double>::infinity() : lw;
  }
  const double top = logw.maxCoeff();
  if (!std::isfinite(top)) throw DegeneracyError("every particle has zero weight");
  Eigen::VectorXd w = (logw.array() - top).exp().matrix();
  w /= w.sum();

  SirResult result;
  result.weights = w;
  result.effective_sample_size = effective_sample_size(w);

  // Systematic resampling: one uniform offset, M evenly spaced pointers.
  const double step = 1.0 / static_cast<double>(m);
  const double offset = rng.uniform_open() * step;
  result.ensemble.states.resize(m, ens.states.cols());
  double cumulative = w[0];
  Eigen::Index source = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double pointer = offset + static_cast<double>(i) * step;
    while (pointer > cumulative && source < m - 1) cumulative += w[++source];
    result.ensemble.states.row(i) = ens.states.row(source);
  }
  result.ensemble.weights = Eigen::VectorXd::Constant(m, step);
  return result;
}

Ensemble assimilate(const Ensemble& ens, const std::vector<ScalarObservation>& obs, const FilterConfig& cfg,
                    Xoshiro256& rng) {
  switch (cfg.kind) {
    case FilterKind::enkf: return enkf_analysis(ens, obs, cfg, rng);
    case FilterKind::sir: return sir_step(ens, obs, rng).ensemble;
    case FilterKind::stochastic_map:
      return sequential_assimilate(ens, obs, [&](const Ensemble& e, const ScalarObservation& o) {
        return stochastic_map_analysis(e, o, cfg, rng);
      });
    case FilterKind::deterministic_map:
      return sequential_assimilate(ens, obs, [&](const Ensemble& e, const ScalarObservation& o) {
        return deterministic_map_analysis(e, o, cfg, rng);
      });
    case FilterKind::deterministic_local:
      return sequential_assimilate(ens, obs, [&](const Ensemble& e, const ScalarObservation& o) {
        return deterministic_local_analysis(e, o, cfg);
      });
  }
  throw ArgumentError("unknown filter kind");
}

}  // namespace tmap
