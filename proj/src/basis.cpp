#include "tmap/basis.hpp"

#include <cmath>

#include "tmap/error.hpp"

namespace tmap {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;

double normal_pdf(double z, double center, double scale) {
  const double u = (z - center) / scale;
  return kInvSqrt2Pi / scale * std::exp(-0.5 * u * u);
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::constant: return "constant";
    case BasisKind::linear: return "linear";
    case BasisKind::gaussian_rbf: return "gaussian_rbf";
    case BasisKind::sigmoid_left: return "sigmoid_left";
    case BasisKind::sigmoid_bump: return "sigmoid_bump";
    case BasisKind::sigmoid_right: return "sigmoid_right";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(const std::string& name) {
  for (auto kind : {BasisKind::constant, BasisKind::linear, BasisKind::gaussian_rbf,
                    BasisKind::sigmoid_left, BasisKind::sigmoid_bump, BasisKind::sigmoid_right}) {
    if (to_string(kind) == name) return kind;
  }
  throw ArgumentError("unknown basis kind '" + name + "'");
}

static BasisFunction scaled_basis(BasisKind kind, double center, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ArgumentError(to_string(kind) + " basis needs a positive finite scale");
  }
  return {kind, center, scale};
}

BasisFunction BasisFunction::rbf(double center, double scale) {
  return scaled_basis(BasisKind::gaussian_rbf, center, scale);
}
BasisFunction BasisFunction::sigmoid_left(double center, double scale) {
  return scaled_basis(BasisKind::sigmoid_left, center, scale);
}
BasisFunction BasisFunction::sigmoid_bump(double center, double scale) {
  return scaled_basis(BasisKind::sigmoid_bump, center, scale);
}
BasisFunction BasisFunction::sigmoid_right(double center, double scale) {
  return scaled_basis(BasisKind::sigmoid_right, center, scale);
}

double BasisFunction::value(double z) const {
  switch (kind) {
    case BasisKind::constant: return 1.0;
    case BasisKind::linear: return z;
    case BasisKind::gaussian_rbf: return normal_pdf(z, center, scale);
    case BasisKind::sigmoid_bump: return 0.5 * std::erfc(-(z - center) * kInvSqrt2 / scale);
    case BasisKind::sigmoid_left: {
      const double delta = (z - center) * kInvSqrt2 / scale;
      return 0.5 * ((z - center) * std::erfc(delta) - scale * kSqrt2OverPi * std::exp(-delta * delta));
    }
    case BasisKind::sigmoid_right: {
      const double delta = (z - center) * kInvSqrt2 / scale;
      return 0.5 * ((z - center) * std::erfc(-delta) + scale * kSqrt2OverPi * std::exp(-delta * delta));
    }
  }
  return 0.0;
}

double BasisFunction::derivative(double z) const {
  switch (kind) {
    case BasisKind::constant: return 0.0;
    case BasisKind::linear: return 1.0;
    case BasisKind::gaussian_rbf: return -(z - center) / (scale * scale) * normal_pdf(z, center, scale);
    case BasisKind::sigmoid_bump: return normal_pdf(z, center, scale);
    case BasisKind::sigmoid_left: return 0.5 * std::erfc((z - center) * kInvSqrt2 / scale);
    case BasisKind::sigmoid_right: return 0.5 * std::erfc(-(z - center) * kInvSqrt2 / scale);
  }
  return 0.0;
}

double BasisFunction::second_derivative(double z) const {
  switch (kind) {
    case BasisKind::constant:
    case BasisKind::linear: return 0.0;
    case BasisKind::gaussian_rbf: {
      const double u = (z - center) / scale;
      return (u * u - 1.0) / (scale * scale) * normal_pdf(z, center, scale);
    }
    case BasisKind::sigmoid_bump: return -(z - center) / (scale * scale) * normal_pdf(z, center, scale);
    case BasisKind::sigmoid_left: return -normal_pdf(z, center, scale);
    case BasisKind::sigmoid_right: return normal_pdf(z, center, scale);
  }
  return 0.0;
}

bool BasisFunction::is_monotone() const {
  switch (kind) {
    case BasisKind::linear:
    case BasisKind::sigmoid_left:
    case BasisKind::sigmoid_bump:
    case BasisKind::sigmoid_right: return true;
    default: return false;
  }
}

BasisFunction::Affine BasisFunction::composed_with_affine(double shift, double s) const {
  // b((z - shift) / s) written in terms of a basis of z.
  switch (kind) {
    case BasisKind::constant: return {*this, 1.0, 0.0};
    case BasisKind::linear: return {*this, 1.0 / s, -shift / s};
    case BasisKind::gaussian_rbf: return {rbf(shift + s * center, s * scale), s, 0.0};
    case BasisKind::sigmoid_bump: return {sigmoid_bump(shift + s * center, s * scale), 1.0, 0.0};
    case BasisKind::sigmoid_left: return {sigmoid_left(shift + s * center, s * scale), 1.0 / s, 0.0};
    case BasisKind::sigmoid_right: return {sigmoid_right(shift + s * center, s * scale), 1.0 / s, 0.0};
  }
  return {*this, 1.0, 0.0};
}

UnivariateFunction::UnivariateFunction(std::vector<Term> terms, bool monotone)
    : terms_(std::move(terms)), monotone_(monotone) {
  if (!monotone_) return;
  for (const auto& t : terms_) {
    if (t.basis.kind == BasisKind::constant) continue;
    if (!t.basis.is_monotone()) {
      throw ArgumentError("monotone function contains non-monotone basis " + to_string(t.basis.kind));
    }
    if (t.coefficient < 0.0) {
      throw ArgumentError("monotone function has a negative coefficient on " + to_string(t.basis.kind));
    }
  }
}

UnivariateFunction UnivariateFunction::linear(double slope, bool monotone) {
  return UnivariateFunction({Term{slope, BasisFunction::linear()}}, monotone);
}

double UnivariateFunction::value(double z) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coefficient * t.basis.value(z);
  return v;
}

double UnivariateFunction::derivative(double z) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coefficient * t.basis.derivative(z);
  return v;
}

double UnivariateFunction::second_derivative(double z) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coefficient * t.basis.second_derivative(z);
  return v;
}

bool UnivariateFunction::is_affine() const {
  for (const auto& t : terms_) {
    if (t.basis.kind != BasisKind::linear && t.basis.kind != BasisKind::constant) return false;
  }
  return true;
}

std::pair<double, double> UnivariateFunction::affine_parts() const {
  double slope = 0.0;
  double offset = 0.0;
  for (const auto& t : terms_) {
    if (t.basis.kind == BasisKind::linear) slope += t.coefficient;
    if (t.basis.kind == BasisKind::constant) offset += t.coefficient;
  }
  return {slope, offset};
}

std::pair<UnivariateFunction, double> UnivariateFunction::composed_with_affine(double shift,
                                                                              double scale) const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  double offset = 0.0;
  for (const auto& t : terms_) {
    const auto a = t.basis.composed_with_affine(shift, scale);
    out.push_back({t.coefficient * a.factor, a.basis});
    offset += t.coefficient * a.offset;
  }
  return {UnivariateFunction(std::move(out), monotone_), offset};
}

}  // namespace tmap
