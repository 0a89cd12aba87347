#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "tmap/rng.hpp"

namespace tmap {

struct Lorenz63 {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

struct Lorenz96 {
  double forcing = 8.0;
  std::size_t n = 40;
};

struct DynamicsSpec {
  std::variant<Lorenz63, Lorenz96> model = Lorenz63{};
  double dt = 0.05;
  double dt_obs = 0.1;
  /// Std of the Gaussian noise added after every integration step.
  double process_noise_std = 0.0;

  std::size_t dimension() const;
  bool is_lorenz96() const { return std::holds_alternative<Lorenz96>(model); }
  /// dt_obs / dt; throws unless it is a positive integer (to 1e-9).
  int steps_per_observation() const;

  static DynamicsSpec lorenz63(double dt_obs = 0.1, double dt = 0.05);
  static DynamicsSpec lorenz96(std::size_t n = 40, double dt_obs = 0.4, double dt = 0.01, double forcing = 8.0);
};

void rhs(const DynamicsSpec& spec, const double* z, double* out);
Eigen::VectorXd rhs(const DynamicsSpec& spec, const Eigen::VectorXd& z);

/// Classical fourth-order Runge-Kutta step for dz/dt = f(z).
template <class F>
Eigen::VectorXd rk4(F&& f, const Eigen::VectorXd& z, double dt) {
  const Eigen::VectorXd k1 = f(z);
  const Eigen::VectorXd k2 = f(Eigen::VectorXd(z + 0.5 * dt * k1));
  const Eigen::VectorXd k3 = f(Eigen::VectorXd(z + 0.5 * dt * k2));
  const Eigen::VectorXd k4 = f(Eigen::VectorXd(z + dt * k3));
  return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Throws DivergenceError when the result is not finite.
Eigen::VectorXd rk4_step(const DynamicsSpec& spec, const Eigen::VectorXd& z, double dt);

/// Advances one observation interval. rng is only drawn from when
/// process noise is configured.
Eigen::VectorXd propagate(const DynamicsSpec& spec, const Eigen::VectorXd& z, Xoshiro256& rng);
void propagate_in_place(const DynamicsSpec& spec, double* z, Xoshiro256& rng);

enum class NoiseKind { gaussian, laplace };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  /// Gaussian standard deviation, or Laplace scale (variance 2 theta^2).
  double theta = 1.0;

  double standard_deviation() const;
  double sample(Xoshiro256& rng) const;
  double log_density(double residual) const;
  double log_density_derivative(double residual) const;
};

struct ObservationSpec {
  std::vector<std::size_t> indices;
  NoiseModel noise;

  /// d indices with stride n / d starting at the first component.
  static ObservationSpec strided(std::size_t n, std::size_t d, NoiseKind kind, double theta);

  std::size_t count() const { return indices.size(); }
};

Eigen::VectorXd observe(const ObservationSpec& obs, const Eigen::VectorXd& z, Xoshiro256& rng);
double log_likelihood(const ObservationSpec& obs, const Eigen::VectorXd& y, const Eigen::VectorXd& z);

/// CSV rows "step,component,value".
void write_trajectory_csv(std::ostream& out, const std::vector<Eigen::VectorXd>& trajectory);

}  // namespace tmap
