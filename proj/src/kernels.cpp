#include "tmap/kernels.hpp"

#include <exception>
#include <string>
#include <vector>

#include "tmap/error.hpp"

namespace tmap {

void for_each_particle(std::size_t count, Execution execution, const std::function<void(std::size_t)>& fn) {
  const auto n = static_cast<long>(count);
  if (execution == Execution::serial) {
    for (long i = 0; i < n; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (Error& e) {
        e.add_context("particle " + std::to_string(i));
        throw;
      }
    }
    return;
  }
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (Error& e) {
      e.add_context("particle " + std::to_string(i));
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Eigen::MatrixXd propagate_ensemble(const DynamicsSpec& spec, const Eigen::MatrixXd& states, std::uint64_t seed,
                                   std::uint64_t step, Execution execution) {
  if (static_cast<std::size_t>(states.cols()) != spec.dimension()) throw ArgumentError("state dimension mismatch");
  // Row-major copy so each particle is contiguous for the integrator.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out = states;
  for_each_particle(static_cast<std::size_t>(states.rows()), execution, [&](std::size_t i) {
    auto rng = make_stream(seed, step, StreamTag::ensemble_process_noise, i);
    propagate_in_place(spec, out.row(static_cast<Eigen::Index>(i)).data(), rng);
  });
  return out;
}

Eigen::MatrixXd conditional_transport(const TriangularMap& map, const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& data, Execution execution) {
  const auto d = static_cast<Eigen::Index>(map.data_dimension());
  const auto n = static_cast<Eigen::Index>(map.dimension());
  if (inputs.cols() != d + n || data.size() != d) throw ArgumentError("conditional_transport: dimension mismatch");
  Eigen::MatrixXd out(inputs.rows(), n);
  for_each_particle(static_cast<std::size_t>(inputs.rows()), execution, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd in = inputs.row(row).transpose();
    const Eigen::VectorXd reference = eval_map(map, in);
    out.row(row) = invert_triangular(map, reference, data).transpose();
  });
  return out;
}

Eigen::MatrixXd composed_transport(const TriangularMap& inner, const TriangularMap& outer, const Eigen::MatrixXd& states,
                                   Execution execution) {
  if (inner.data_dimension() != 0 || outer.data_dimension() != 0 || inner.dimension() != outer.dimension() ||
      static_cast<std::size_t>(states.cols()) != inner.dimension()) {
    throw ArgumentError("composed_transport: dimension mismatch");
  }
  Eigen::MatrixXd out(states.rows(), states.cols());
  for_each_particle(static_cast<std::size_t>(states.rows()), execution, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd x = states.row(row).transpose();
    out.row(row) = eval_map(outer, Eigen::VectorXd(eval_map(inner, x))).transpose();
  });
  return out;
}

}  // namespace tmap
