#include "tmap/triangular_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tmap/error.hpp"

namespace tmap {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}

MapComponent::MapComponent(std::size_t index, std::size_t monotone_input,
                           std::vector<NonmonotonePart> nonmonotone, UnivariateFunction monotone,
                           double constant)
    : index_(index),
      monotone_input_(monotone_input),
      nonmonotone_(std::move(nonmonotone)),
      monotone_(std::move(monotone)),
      constant_(constant) {
  if (!monotone_.monotone()) {
    throw ArgumentError("component " + std::to_string(index_) + ": last-variable part must be monotone");
  }
  std::sort(nonmonotone_.begin(), nonmonotone_.end(),
            [](const auto& a, const auto& b) { return a.input < b.input; });
  for (std::size_t i = 0; i < nonmonotone_.size(); ++i) {
    if (nonmonotone_[i].input >= monotone_input_) {
      throw ArgumentError("component " + std::to_string(index_) + " depends on input " +
                          std::to_string(nonmonotone_[i].input) + " beyond its own position");
    }
    if (i > 0 && nonmonotone_[i].input == nonmonotone_[i - 1].input) {
      throw ArgumentError("component " + std::to_string(index_) + " lists input " +
                          std::to_string(nonmonotone_[i].input) + " twice");
    }
    active_.push_back(nonmonotone_[i].input);
  }
  active_.push_back(monotone_input_);
}

MapComponent MapComponent::identity(std::size_t index, std::size_t monotone_input) {
  return MapComponent(index, monotone_input, {}, UnivariateFunction::linear(1.0, true), 0.0);
}

void MapComponent::set_reference(double center, double scale) {
  reference_center_ = center;
  reference_scale_ = scale > 0.0 && std::isfinite(scale) ? scale : 1.0;
}

void MapComponent::check_inputs(std::span<const double> inputs) const {
  if (inputs.size() <= monotone_input_) {
    throw ArgumentError("component " + std::to_string(index_) + " needs input " +
                        std::to_string(monotone_input_) + " but only " + std::to_string(inputs.size()) +
                        " inputs were given");
  }
}

double MapComponent::offset(std::span<const double> inputs) const {
  check_inputs(inputs);
  double v = constant_;
  for (const auto& part : nonmonotone_) v += part.function.value(inputs[part.input]);
  return v;
}

double MapComponent::evaluate(std::span<const double> inputs) const {
  return offset(inputs) + monotone_.value(inputs[monotone_input_]);
}

double MapComponent::partial_last(std::span<const double> inputs) const {
  check_inputs(inputs);
  return monotone_.derivative(inputs[monotone_input_]);
}

bool MapComponent::is_identity() const {
  if (constant_ != 0.0 || !nonmonotone_.empty() || !monotone_.is_affine()) return false;
  const auto [slope, off] = monotone_.affine_parts();
  return slope == 1.0 && off == 0.0;
}

double MapComponent::solve_last(std::span<const double> inputs, double target) const {
  const double t = target - offset(inputs);
  if (monotone_.is_affine()) {
    const auto [slope, off] = monotone_.affine_parts();
    if (!(slope > 0.0)) {
      throw MonotonicityError("component " + std::to_string(index_) + " has non-positive slope");
    }
    return (t - off) / slope;
  }

  return solve_increasing([this](double xi) { return monotone_.value(xi); },
                          [this](double xi) { return monotone_.derivative(xi); }, t, reference_center_,
                          reference_scale_, index_);
}

double solve_increasing(const std::function<double(double)>& g, const std::function<double(double)>& dg,
                        double target, double center, double scale, std::size_t component) {
  auto f = [&](double xi) { return g(xi) - target; };
  const double width0 = inversion::kInitialBracketScales * scale;
  double lo = center - width0;
  double hi = center + width0;
  double flo = f(lo);
  double fhi = f(hi);
  int doublings = 0;
  while (flo > 0.0 && doublings < inversion::kMaxBracketDoublings) {
    const double w = 2.0 * (hi - lo);
    hi = lo;
    fhi = flo;
    lo -= w;
    flo = f(lo);
    ++doublings;
  }
  doublings = 0;
  while (fhi < 0.0 && doublings < inversion::kMaxBracketDoublings) {
    const double w = 2.0 * (hi - lo);
    lo = hi;
    flo = fhi;
    hi += w;
    fhi = f(hi);
    ++doublings;
  }
  if (!(flo <= 0.0 && fhi >= 0.0)) {
    throw NonconvergenceError("component " + std::to_string(component) +
                                  ": root not bracketed after bracket expansion",
                              component);
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;

  // Safeguarded Newton: Newton steps that leave the bracket become bisection.
  double x = lo - flo * (hi - lo) / (fhi - flo);
  double best = x;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 400; ++iter) {
    const double fx = f(x);
    if (std::abs(fx) < best_residual) {
      best_residual = std::abs(fx);
      best = x;
    }
    if (std::abs(fx) <= inversion::kResidualTolerance) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    const double d = dg(x);
    double next = d > 0.0 ? x - fx / d : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return best;
}

TriangularMap::TriangularMap(std::size_t data_dim, std::vector<MapComponent> components)
    : data_dim_(data_dim), components_(std::move(components)) {
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    if (c.index() != k || c.monotone_input() != data_dim_ + k) {
      throw ArgumentError("component " + std::to_string(k) + " is out of triangular order");
    }
  }
}

TriangularMap TriangularMap::identity(std::size_t n) {
  std::vector<MapComponent> comps;
  comps.reserve(n);
  for (std::size_t k = 0; k < n; ++k) comps.push_back(MapComponent::identity(k, k));
  return TriangularMap(0, std::move(comps));
}

double eval_component(const MapComponent& comp, std::span<const double> inputs) {
  return comp.evaluate(inputs);
}

double partial_last(const MapComponent& comp, std::span<const double> inputs) {
  return comp.partial_last(inputs);
}

Eigen::VectorXd eval_map(const TriangularMap& map, std::span<const double> inputs) {
  if (inputs.size() != map.input_dimension()) {
    throw ArgumentError("eval_map: expected " + std::to_string(map.input_dimension()) + " inputs, got " +
                        std::to_string(inputs.size()));
  }
  Eigen::VectorXd out(map.dimension());
  for (std::size_t k = 0; k < map.dimension(); ++k) out[k] = map.component(k).evaluate(inputs);
  return out;
}

Eigen::VectorXd eval_map(const TriangularMap& map, const Eigen::VectorXd& inputs) {
  return eval_map(map, std::span<const double>(inputs.data(), inputs.size()));
}

Eigen::VectorXd invert_triangular(const TriangularMap& map, std::span<const double> x,
                                  std::span<const double> data) {
  const std::size_t n = map.dimension();
  const std::size_t d = map.data_dimension();
  if (x.size() != n) {
    throw ArgumentError("invert_triangular: expected " + std::to_string(n) + " values, got " +
                        std::to_string(x.size()));
  }
  if (data.size() != d) {
    throw ArgumentError("invert_triangular: expected " + std::to_string(d) + " data values, got " +
                        std::to_string(data.size()));
  }
  std::vector<double> buffer(d + n, 0.0);
  std::copy(data.begin(), data.end(), buffer.begin());
  Eigen::VectorXd z(n);
  for (std::size_t k = 0; k < n; ++k) {
    z[k] = map.component(k).solve_last(buffer, x[k]);
    buffer[d + k] = z[k];
  }
  return z;
}

Eigen::VectorXd invert_triangular(const TriangularMap& map, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& data) {
  return invert_triangular(map, std::span<const double>(x.data(), x.size()),
                           std::span<const double>(data.data(), data.size()));
}

double log_pullback_density(const TriangularMap& map, std::span<const double> z) {
  if (map.data_dimension() != 0) throw ArgumentError("pullback density needs a map without data slots");
  if (z.size() != map.dimension()) throw ArgumentError("log_pullback_density: dimension mismatch");
  double value = -kLogSqrt2Pi * static_cast<double>(map.dimension());
  for (const auto& comp : map.components()) {
    const double u = comp.evaluate(z);
    const double d = comp.partial_last(z);
    if (!(d > 0.0)) {
      throw MonotonicityError("component " + std::to_string(comp.index()) +
                              " has non-positive derivative in its last variable");
    }
    value += -0.5 * u * u + std::log(d);
  }
  return value;
}

double log_pullback_density(const TriangularMap& map, const Eigen::VectorXd& z) {
  return log_pullback_density(map, std::span<const double>(z.data(), z.size()));
}

Eigen::VectorXd log_pullback_gradient(const TriangularMap& map, std::span<const double> z) {
  if (map.data_dimension() != 0) throw ArgumentError("pullback density needs a map without data slots");
  if (z.size() != map.dimension()) throw ArgumentError("log_pullback_gradient: dimension mismatch");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(map.dimension());
  for (const auto& comp : map.components()) {
    const std::size_t k = comp.index();
    const double u = comp.evaluate(z);
    for (const auto& part : comp.nonmonotone()) g[part.input] -= u * part.function.derivative(z[part.input]);
    const double d1 = comp.monotone().derivative(z[k]);
    if (!(d1 > 0.0)) {
      throw MonotonicityError("component " + std::to_string(k) +
                              " has non-positive derivative in its last variable");
    }
    g[k] += -u * d1 + comp.monotone().second_derivative(z[k]) / d1;
  }
  return g;
}

}  // namespace tmap
