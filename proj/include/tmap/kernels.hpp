#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>

#include "tmap/models.hpp"
#include "tmap/triangular_map.hpp"

namespace tmap {

/// Particle loops run under OpenMP or on the calling thread. Both produce
/// identical results: every particle's work is independent and seeded per index.
enum class Execution { parallel, serial };

/// Calls fn(i) for i in [0, count). When several calls throw, the exception
/// of the lowest index is rethrown with "particle i" context.
void for_each_particle(std::size_t count, Execution execution, const std::function<void(std::size_t)>& fn);

/// Rows of states are particles. Particle i draws process noise from
/// make_stream(seed, step, ensemble_process_noise, i).
Eigen::MatrixXd propagate_ensemble(const DynamicsSpec& spec, const Eigen::MatrixXd& states, std::uint64_t seed,
                                   std::uint64_t step, Execution execution = Execution::parallel);

/// z^i = S(data, .)^{-1}(S(inputs^i)) where inputs rows are [data^i, state^i].
Eigen::MatrixXd conditional_transport(const TriangularMap& map, const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& data, Execution execution = Execution::parallel);

/// z^i = outer(inner(x^i)); both maps have no data slots.
Eigen::MatrixXd composed_transport(const TriangularMap& inner, const TriangularMap& outer, const Eigen::MatrixXd& states,
                                   Execution execution = Execution::parallel);

}  // namespace tmap
