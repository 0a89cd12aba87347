#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tmap/filters.hpp"
#include "tmap/models.hpp"

namespace tmap {

struct ExperimentConfig {
  DynamicsSpec dynamics;
  ObservationSpec observation;
  FilterConfig filter;
  std::size_t ensemble_size = 400;
  std::size_t spinup_steps = 2000;
  std::size_t test_steps = 4000;
  std::size_t metric_window = 2000;
  /// Inflation of the spin-up EnKF; independent of the filter under test so
  /// that one spin-up serves a whole sweep.
  double spinup_inflation = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AssimilationRecord {
  std::size_t step = 0;
  double rmse = 0.0;
  double spread = 0.0;
  std::size_t coverage_hits = 0;
  std::size_t dimension = 0;
  double crps = 0.0;
  double wall_seconds = 0.0;

  double coverage_fraction() const { return static_cast<double>(coverage_hits) / static_cast<double>(dimension); }
};

struct Summary {
  /// False when no record falls in the metric window.
  bool defined = false;
  bool diverged = false;
  std::string failure;
  std::size_t completed_steps = 0;
  std::size_t window = 0;
  double mean_rmse = 0.0;
  double median_rmse = 0.0;
  double mean_spread = 0.0;
  double median_spread = 0.0;
  double coverage = 0.0;
  double mean_crps = 0.0;
  double median_crps = 0.0;
  /// Root mean temporal variance of the truth over the test phase.
  double climatological_spread = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<AssimilationRecord> records;
  Summary summary;
};

/// Truth state and analysis ensemble after the EnKF spin-up.
struct SpinupState {
  Eigen::VectorXd truth;
  Eigen::MatrixXd ensemble;
  std::size_t step = 0;
  bool diverged = false;
  std::string failure;
};

/// Truth and observation at assimilation step k depend only on the seed,
/// the model and k, so every filter in a sweep sees the same data.
class TruthGenerator {
 public:
  /// Starts from Z_0 ~ N(0, I).
  explicit TruthGenerator(const ExperimentConfig& cfg);
  TruthGenerator(const ExperimentConfig& cfg, Eigen::VectorXd state, std::size_t step);
  /// Advances to the next step; returns its observation.
  Eigen::VectorXd advance();
  const Eigen::VectorXd& state() const { return state_; }
  std::size_t step() const { return step_; }

 private:
  const ExperimentConfig* cfg_;
  Eigen::VectorXd state_;
  std::size_t step_ = 0;
};

SpinupState spin_up(const ExperimentConfig& cfg);

ExperimentResult run_from(const ExperimentConfig& cfg, const SpinupState& start);

ExperimentResult run_twin_experiment(const ExperimentConfig& cfg);

Summary summarize(const std::vector<AssimilationRecord>& records, std::size_t window);

struct SweepGrid {
  std::vector<std::optional<double>> radius;
  std::vector<std::optional<std::size_t>> identity_cutoff;
  std::vector<double> inflation;
  std::vector<std::optional<double>> enkf_radius;

  /// Every list empty is replaced by the base configuration's value.
  SweepGrid filled_from(const FilterConfig& base) const;
  std::size_t size() const;
};

struct SweepRow {
  FilterConfig filter;
  Summary summary;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t best = 0;
};

/// Runs every combination from a shared spin-up and picks the smallest
/// time-averaged RMSE; ties go to the smaller radius, then smaller inflation.
/// Throws when every combination diverges.
SweepResult run_sweep(const ExperimentConfig& base, const SweepGrid& grid, bool parallel = true);

void write_records_csv(std::ostream& out, const std::vector<AssimilationRecord>& records);

}  // namespace tmap
