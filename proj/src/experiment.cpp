#include "tmap/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>

#include "tmap/error.hpp"
#include "tmap/kernels.hpp"
#include "tmap/metrics.hpp"

namespace tmap {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

Eigen::MatrixXd standard_normal_ensemble(std::size_t m, std::size_t n, Xoshiro256& rng) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  }
  return x;
}

FilterConfig spinup_filter(const ExperimentConfig& cfg) {
  FilterConfig f;
  f.kind = FilterKind::enkf;
  f.inflation = cfg.spinup_inflation;
  f.topology = cfg.filter.topology;
  f.distance = cfg.filter.distance;
  f.execution = cfg.filter.execution;
  return f;
}

double radius_key(const std::optional<double>& r) { return r.value_or(std::numeric_limits<double>::infinity()); }

}  // namespace

void ExperimentConfig::validate() const {
  const std::size_t n = dynamics.dimension();
  dynamics.steps_per_observation();
  if (!(dynamics.process_noise_std >= 0.0)) throw ArgumentError("process noise must be nonnegative");
  if (observation.count() == 0) throw ArgumentError("at least one observed component is required");
  for (std::size_t j = 0; j < observation.count(); ++j) {
    if (observation.indices[j] >= n || (j > 0 && observation.indices[j] <= observation.indices[j - 1])) {
      throw ArgumentError("observed indices must be strictly increasing and within the state");
    }
  }
  if (!(observation.noise.theta > 0.0)) throw ArgumentError("observation noise scale must be positive");
  filter.validate();
  if (ensemble_size < 2) throw ArgumentError("ensemble needs at least two particles");
  if (metric_window > test_steps) throw ArgumentError("metric window exceeds the test steps");
  if (!(spinup_inflation >= 1.0)) throw ArgumentError("spin-up inflation must be at least 1");
}

TruthGenerator::TruthGenerator(const ExperimentConfig& cfg) : cfg_(&cfg) {
  auto rng = make_stream(cfg.seed, 0, StreamTag::initial_truth);
  state_ = standard_normal_ensemble(1, cfg.dynamics.dimension(), rng).row(0).transpose();
}

TruthGenerator::TruthGenerator(const ExperimentConfig& cfg, Eigen::VectorXd state, std::size_t step)
    : cfg_(&cfg), state_(std::move(state)), step_(step) {}

Eigen::VectorXd TruthGenerator::advance() {
  ++step_;
  auto noise = make_stream(cfg_->seed, step_, StreamTag::truth_process_noise);
  state_ = propagate(cfg_->dynamics, state_, noise);
  auto obs = make_stream(cfg_->seed, step_, StreamTag::truth_observation);
  return observe(cfg_->observation, state_, obs);
}

SpinupState spin_up(const ExperimentConfig& cfg) {
  cfg.validate();
  TruthGenerator truth(cfg);
  auto init = make_stream(cfg.seed, 0, StreamTag::initial_ensemble);
  SpinupState out;
  out.ensemble = standard_normal_ensemble(cfg.ensemble_size, cfg.dynamics.dimension(), init);
  const FilterConfig filter = spinup_filter(cfg);
  try {
    for (std::size_t k = 0; k < cfg.spinup_steps; ++k) {
      const Eigen::VectorXd y = truth.advance();
      Ensemble ens;
      ens.states = propagate_ensemble(cfg.dynamics, out.ensemble, cfg.seed, truth.step(), filter.execution);
      auto rng = make_stream(cfg.seed, truth.step(), StreamTag::analysis);
      out.ensemble = enkf_analysis(ens, scalar_observations(cfg.observation, y), filter, rng).states;
      if (!out.ensemble.allFinite()) throw DivergenceError("spin-up ensemble became non-finite");
    }
  } catch (Error& e) {
    e.add_context("spin-up step " + std::to_string(truth.step()));
    out.diverged = true;
    out.failure = e.what();
  }
  out.truth = truth.state();
  out.step = truth.step();
  return out;
}

Summary summarize(const std::vector<AssimilationRecord>& records, std::size_t window) {
  Summary s;
  s.completed_steps = records.size();
  s.window = std::min(window, records.size());
  if (s.window == 0) return s;
  s.defined = true;
  std::vector<double> r, sp, c;
  double coverage = 0.0;
  for (auto it = records.end() - static_cast<std::ptrdiff_t>(s.window); it != records.end(); ++it) {
    r.push_back(it->rmse);
    sp.push_back(it->spread);
    c.push_back(it->crps);
    coverage += it->coverage_fraction();
  }
  const auto w = static_cast<double>(s.window);
  auto mean = [&](const std::vector<double>& v) {
    double t = 0.0;
    for (double x : v) t += x;
    return t / w;
  };
  s.mean_rmse = mean(r);
  s.median_rmse = median(r);
  s.mean_spread = mean(sp);
  s.median_spread = median(sp);
  s.coverage = coverage / w;
  s.mean_crps = mean(c);
  s.median_crps = median(c);
  return s;
}

ExperimentResult run_from(const ExperimentConfig& cfg, const SpinupState& start) {
  cfg.validate();
  ExperimentResult result;
  if (start.diverged) {
    result.summary.diverged = true;
    result.summary.failure = start.failure;
    return result;
  }
  TruthGenerator truth(cfg, start.truth, start.step);
  Eigen::MatrixXd states = start.ensemble;
  const auto n = static_cast<Eigen::Index>(cfg.dynamics.dimension());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  std::string failure;
  const auto begin = std::chrono::steady_clock::now();
  try {
    for (std::size_t t = 0; t < cfg.test_steps; ++t) {
      const auto tick = std::chrono::steady_clock::now();
      const Eigen::VectorXd y = truth.advance();
      const std::size_t step = truth.step();
      Ensemble ens;
      ens.states = propagate_ensemble(cfg.dynamics, states, cfg.seed, step, cfg.filter.execution);
      auto rng = make_stream(cfg.seed, step, StreamTag::analysis);
      states = assimilate(ens, scalar_observations(cfg.observation, y), cfg.filter, rng).states;
      if (!states.allFinite()) throw DivergenceError("analysis ensemble became non-finite");

      const Eigen::VectorXd& z = truth.state();
      sum += z;
      sum_sq += z.cwiseProduct(z);
      AssimilationRecord rec;
      rec.step = step;
      rec.rmse = rmse(states.colwise().mean().transpose(), z);
      rec.spread = spread(states);
      rec.coverage_hits = coverage_hits(states, z);
      rec.dimension = static_cast<std::size_t>(n);
      rec.crps = mean_crps(states, z);
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
      result.records.push_back(rec);
    }
  } catch (Error& e) {
    e.add_context("assimilation step " + std::to_string(truth.step()));
    failure = e.what();
  }
  result.summary = summarize(result.records, cfg.metric_window);
  result.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  if (!failure.empty()) {
    result.summary.diverged = true;
    result.summary.failure = failure;
  }
  if (!result.records.empty()) {
    const auto count = static_cast<double>(result.records.size());
    const Eigen::VectorXd mean = sum / count;
    const Eigen::VectorXd var = (sum_sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
    result.summary.climatological_spread = std::sqrt(var.mean());
  }
  return result;
}

ExperimentResult run_twin_experiment(const ExperimentConfig& cfg) { return run_from(cfg, spin_up(cfg)); }

SweepGrid SweepGrid::filled_from(const FilterConfig& base) const {
  SweepGrid g = *this;
  if (g.radius.empty()) g.radius = {base.radius};
  if (g.identity_cutoff.empty()) g.identity_cutoff = {base.identity_cutoff};
  if (g.inflation.empty()) g.inflation = {base.inflation};
  if (g.enkf_radius.empty()) g.enkf_radius = {base.enkf_radius};
  return g;
}

std::size_t SweepGrid::size() const {
  return radius.size() * identity_cutoff.size() * inflation.size() * enkf_radius.size();
}

SweepResult run_sweep(const ExperimentConfig& base, const SweepGrid& grid, bool parallel) {
  base.validate();
  const SweepGrid g = grid.filled_from(base.filter);
  SweepResult out;
  for (const auto& r : g.radius) {
    for (const auto& j : g.identity_cutoff) {
      for (double zeta : g.inflation) {
        for (const auto& c : g.enkf_radius) {
          SweepRow row;
          row.filter = base.filter;
          row.filter.radius = r;
          row.filter.identity_cutoff = j;
          row.filter.inflation = zeta;
          row.filter.enkf_radius = c;
          row.filter.validate();
          out.rows.push_back(row);
        }
      }
    }
  }

  const SpinupState start = spin_up(base);
  const auto count = static_cast<long>(out.rows.size());
  std::vector<std::exception_ptr> errors(out.rows.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      ExperimentConfig cfg = base;
      cfg.filter = out.rows[static_cast<std::size_t>(i)].filter;
      out.rows[static_cast<std::size_t>(i)].summary = run_from(cfg, start).summary;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& s = out.rows[i].summary;
    if (s.diverged || !s.defined || !std::isfinite(s.mean_rmse)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = out.rows[*best];
    const auto key = std::make_tuple(s.mean_rmse, radius_key(out.rows[i].filter.radius), out.rows[i].filter.inflation);
    const auto best_key = std::make_tuple(b.summary.mean_rmse, radius_key(b.filter.radius), b.filter.inflation);
    if (key < best_key) best = i;
  }
  if (!best) throw DivergenceError("every sweep combination diverged");
  out.best = *best;
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<AssimilationRecord>& records) {
  out << "step,rmse,spread,coverage_frac,crps\n" << std::setprecision(17);
  for (const auto& r : records) {
    out << r.step << ',' << r.rmse << ',' << r.spread << ',' << r.coverage_fraction() << ',' << r.crps << '\n';
  }
}

}  // namespace tmap
