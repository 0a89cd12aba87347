#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmap/estimation.hpp"
#include "tmap/kernels.hpp"
#include "tmap/models.hpp"
#include "tmap/rng.hpp"
#include "tmap/sparsity.hpp"

namespace tmap {

struct Ensemble {
  /// M x n, one particle per row.
  Eigen::MatrixXd states;
  /// M x d perturbed observations; when set, analyses use these draws
  /// instead of sampling their own.
  std::optional<Eigen::MatrixXd> simulated_obs;
  std::optional<Eigen::VectorXd> weights;

  std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(states.cols()); }
  void validate() const;
};

enum class FilterKind { enkf, stochastic_map, deterministic_map, deterministic_local, sir };

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

enum class Topology { line, cycle };

std::string to_string(Topology topology);
Topology topology_from_string(const std::string& name);

struct FilterConfig {
  FilterKind kind = FilterKind::stochastic_map;
  int p = 0;
  double gamma = 2.0;
  MonotoneScope nonlinear_monotone = MonotoneScope::first_component;
  /// Localization radius r of the map; unset means dense.
  std::optional<double> radius;
  /// j: map components ranked j and beyond (by distance to the observed
  /// variable) are left as the identity.
  std::optional<std::size_t> identity_cutoff;
  /// zeta, applied to the ensemble copy that fits the map or gain.
  double inflation = 1.0;
  /// Gaspari-Cohn half-support c for the EnKF gain; unset means no taper.
  std::optional<double> enkf_radius;
  Topology topology = Topology::line;
  /// Overrides topology when set.
  Distance distance;
  /// Let every map component depend on the simulated observation, not only
  /// the observed variable's component.
  bool data_to_all_components = false;
  /// Reference sample count for density-targeted fits; 0 picks max(10M, 1000).
  std::size_t reference_count = 0;
  std::size_t grid_points = 2001;
  Execution execution = Execution::parallel;

  void validate() const;
  MapSpec map_spec() const;
  Distance state_distance(std::size_t n) const;
};

struct ScalarObservation {
  double value = 0.0;
  std::size_t index = 0;
  NoiseModel noise;

  double log_likelihood(double state) const { return noise.log_density(value - state); }
};

/// Splits y into scalar observations in ascending observed-index order.
std::vector<ScalarObservation> scalar_observations(const ObservationSpec& obs, const Eigen::VectorXd& y);

/// Standard fifth-order piecewise rational taper with support 2c.
double gaspari_cohn(double distance, double c);

Eigen::MatrixXd inflate(const Eigen::MatrixXd& states, double zeta);
Ensemble inflate(const Ensemble& ens, double zeta);

/// State indices sorted by distance from observed, ties by ascending index.
std::vector<std::size_t> distance_ordering(const Distance& distance, std::size_t n, std::size_t observed);

/// Map sparsity on the reordered state, with data_dim simulated-observation
/// slots in front.
SparsityPattern analysis_sparsity(const FilterConfig& cfg, const Distance& distance,
                                  const std::vector<std::size_t>& order, std::size_t data_dim);

Ensemble stochastic_map_analysis(const Ensemble& ens, const ScalarObservation& obs, const FilterConfig& cfg,
                                 Xoshiro256& rng);

Ensemble enkf_analysis(const Ensemble& ens, std::span<const ScalarObservation> obs, const FilterConfig& cfg,
                       Xoshiro256& rng);

/// rng only seeds the reference samples of the density-targeted fit.
Ensemble deterministic_map_analysis(const Ensemble& ens, const ScalarObservation& obs, const FilterConfig& cfg,
                                    Xoshiro256& rng);

Ensemble deterministic_local_analysis(const Ensemble& ens, const ScalarObservation& obs, const FilterConfig& cfg);

using ScalarAnalysis = std::function<Ensemble(const Ensemble&, const ScalarObservation&)>;

/// Folds analysis over obs in ascending observed-index order. When
/// ens.simulated_obs has one column per observation, observation j sees
/// column j.
Ensemble sequential_assimilate(const Ensemble& ens, std::vector<ScalarObservation> obs, const ScalarAnalysis& analysis);

double effective_sample_size(const Eigen::VectorXd& weights);

struct SirResult {
  /// Resampled, with uniform weights.
  Ensemble ensemble;
  /// Normalized weights before resampling.
  Eigen::VectorXd weights;
  double effective_sample_size = 0.0;
};

SirResult sir_step(const Ensemble& ens, std::span<const ScalarObservation> obs, Xoshiro256& rng);

/// One analysis step of the configured filter for all observations of an
/// assimilation time.
Ensemble assimilate(const Ensemble& ens, const std::vector<ScalarObservation>& obs, const FilterConfig& cfg,
                    Xoshiro256& rng);

}  // namespace tmap
