#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "tmap/experiment.hpp"

namespace tmap {

/// Key = value text, one entry per line, '#' starts a comment. Keys that are
/// absent take their defaults; unknown keys are rejected. See README for the
/// schema.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Inverse of parse_config up to formatting.
std::string format_config(const ExperimentConfig& cfg);

/// Comma-separated lists under the keys radius, cutoff, inflation and
/// enkf_radius; "none" stands for an unset value.
SweepGrid parse_grid(std::istream& in);
SweepGrid load_grid(const std::string& path);

std::string summary_json(const ExperimentConfig& cfg, const Summary& summary);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
std::string best_json(const ExperimentConfig& base, const SweepResult& sweep);

}  // namespace tmap
