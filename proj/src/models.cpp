#include "tmap/models.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "tmap/error.hpp"

namespace tmap {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}

std::size_t DynamicsSpec::dimension() const {
  if (const auto* l96 = std::get_if<Lorenz96>(&model)) return l96->n;
  return 3;
}

int DynamicsSpec::steps_per_observation() const {
  if (!(dt > 0.0) || !(dt_obs > 0.0)) throw ArgumentError("time steps must be positive");
  const double ratio = dt_obs / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ArgumentError("observation interval must be an integer multiple of the integration step");
  }
  return static_cast<int>(rounded);
}

DynamicsSpec DynamicsSpec::lorenz63(double dt_obs, double dt) {
  DynamicsSpec s;
  s.model = Lorenz63{};
  s.dt = dt;
  s.dt_obs = dt_obs;
  return s;
}

DynamicsSpec DynamicsSpec::lorenz96(std::size_t n, double dt_obs, double dt, double forcing) {
  if (n < 4) throw ArgumentError("Lorenz-96 needs at least four variables");
  DynamicsSpec s;
  s.model = Lorenz96{forcing, n};
  s.dt = dt;
  s.dt_obs = dt_obs;
  return s;
}

void rhs(const DynamicsSpec& spec, const double* z, double* out) {
  if (const auto* l63 = std::get_if<Lorenz63>(&spec.model)) {
    out[0] = l63->sigma * (z[1] - z[0]);
    out[1] = z[0] * (l63->rho - z[2]) - z[1];
    out[2] = z[0] * z[1] - l63->beta * z[2];
    return;
  }
  const auto& l96 = std::get<Lorenz96>(spec.model);
  const std::size_t n = l96.n;
  const double f = l96.forcing;
  out[0] = (z[1] - z[n - 2]) * z[n - 1] - z[0] + f;
  out[1] = (z[2] - z[n - 1]) * z[0] - z[1] + f;
  for (std::size_t j = 2; j + 1 < n; ++j) out[j] = (z[j + 1] - z[j - 2]) * z[j - 1] - z[j] + f;
  out[n - 1] = (z[0] - z[n - 3]) * z[n - 2] - z[n - 1] + f;
}

Eigen::VectorXd rhs(const DynamicsSpec& spec, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != spec.dimension()) throw ArgumentError("state dimension mismatch");
  Eigen::VectorXd out(z.size());
  rhs(spec, z.data(), out.data());
  return out;
}

Eigen::VectorXd rk4_step(const DynamicsSpec& spec, const Eigen::VectorXd& z, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("integration step must be positive");
  Eigen::VectorXd next = rk4([&](const Eigen::VectorXd& v) { return rhs(spec, v); }, z, dt);
  if (!next.allFinite()) throw DivergenceError("state became non-finite during integration");
  return next;
}

void propagate_in_place(const DynamicsSpec& spec, double* z, Xoshiro256& rng) {
  const int steps = spec.steps_per_observation();
  const std::size_t n = spec.dimension();
  const double dt = spec.dt;
  // Flat workspace: the ensemble forecast calls this per particle.
  std::vector<double> work(5 * n);
  double* k1 = work.data();
  double* k2 = k1 + n;
  double* k3 = k2 + n;
  double* k4 = k3 + n;
  double* tmp = k4 + n;
  for (int s = 0; s < steps; ++s) {
    rhs(spec, z, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
    rhs(spec, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
    rhs(spec, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + dt * k3[i];
    rhs(spec, tmp, k4);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (spec.process_noise_std > 0.0) z[i] += spec.process_noise_std * rng.normal();
      finite = finite && std::isfinite(z[i]);
    }
    if (!finite) throw DivergenceError("state became non-finite during integration");
  }
}

Eigen::VectorXd propagate(const DynamicsSpec& spec, const Eigen::VectorXd& z, Xoshiro256& rng) {
  if (static_cast<std::size_t>(z.size()) != spec.dimension()) throw ArgumentError("state dimension mismatch");
  Eigen::VectorXd out = z;
  propagate_in_place(spec, out.data(), rng);
  return out;
}

std::string to_string(NoiseKind kind) { return kind == NoiseKind::gaussian ? "gaussian" : "laplace"; }

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "laplace") return NoiseKind::laplace;
  throw ArgumentError("unknown noise kind '" + name + "'");
}

ObservationSpec ObservationSpec::strided(std::size_t n, std::size_t d, NoiseKind kind, double theta) {
  if (d == 0 || d > n || n % d != 0) throw ArgumentError("observation count must divide the state dimension");
  if (!(theta >= 0.0)) throw ArgumentError("noise scale must be nonnegative");
  ObservationSpec o;
  o.noise = {kind, theta};
  for (std::size_t i = 0; i < n; i += n / d) o.indices.push_back(i);
  return o;
}

double NoiseModel::standard_deviation() const { return kind == NoiseKind::gaussian ? theta : std::sqrt(2.0) * theta; }

double NoiseModel::sample(Xoshiro256& rng) const {
  if (theta == 0.0) return 0.0;
  if (kind == NoiseKind::gaussian) return theta * rng.normal();
  const double u = rng.uniform_open() - 0.5;
  return -theta * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

double NoiseModel::log_density(double residual) const {
  if (kind == NoiseKind::gaussian) {
    return -0.5 * (residual / theta) * (residual / theta) - std::log(theta) - kLogSqrt2Pi;
  }
  return -std::abs(residual) / theta - std::log(2.0 * theta);
}

double NoiseModel::log_density_derivative(double residual) const {
  if (kind == NoiseKind::gaussian) return -residual / (theta * theta);
  return residual == 0.0 ? 0.0 : -std::copysign(1.0, residual) / theta;
}

Eigen::VectorXd observe(const ObservationSpec& obs, const Eigen::VectorXd& z, Xoshiro256& rng) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(obs.count()));
  for (std::size_t j = 0; j < obs.count(); ++j) {
    if (obs.indices[j] >= static_cast<std::size_t>(z.size())) throw ArgumentError("observed index out of range");
    y[static_cast<Eigen::Index>(j)] = z[static_cast<Eigen::Index>(obs.indices[j])] + obs.noise.sample(rng);
  }
  return y;
}

double log_likelihood(const ObservationSpec& obs, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(y.size()) != obs.count()) throw ArgumentError("observation dimension mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < obs.count(); ++j) {
    total += obs.noise.log_density(y[static_cast<Eigen::Index>(j)] - z[static_cast<Eigen::Index>(obs.indices[j])]);
  }
  return total;
}

void write_trajectory_csv(std::ostream& out, const std::vector<Eigen::VectorXd>& trajectory) {
  out << "step,component,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    for (Eigen::Index i = 0; i < trajectory[k].size(); ++i) out << k << ',' << i << ',' << trajectory[k][i] << '\n';
  }
}

}  // namespace tmap
