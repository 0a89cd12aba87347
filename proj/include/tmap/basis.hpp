#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tmap {

enum class BasisKind {
  constant,
  linear,
  gaussian_rbf,   // normal pdf N(z; center, scale^2)
  sigmoid_left,   // antiderivative of (1 - erf(Delta)) / 2, linear as z -> -inf
  sigmoid_bump,   // (1 + erf(Delta)) / 2
  sigmoid_right,  // antiderivative of (1 + erf(Delta)) / 2, linear as z -> +inf
};

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// One univariate basis function. Delta = (z - center) / (sqrt(2) * scale).
struct BasisFunction {
  BasisKind kind = BasisKind::linear;
  double center = 0.0;
  double scale = 1.0;

  static BasisFunction constant() { return {BasisKind::constant, 0.0, 1.0}; }
  static BasisFunction linear() { return {BasisKind::linear, 0.0, 1.0}; }
  static BasisFunction rbf(double center, double scale);
  static BasisFunction sigmoid_left(double center, double scale);
  static BasisFunction sigmoid_bump(double center, double scale);
  static BasisFunction sigmoid_right(double center, double scale);

  double value(double z) const;
  double derivative(double z) const;
  double second_derivative(double z) const;

  /// True for bases that are nondecreasing, i.e. admissible in a monotone
  /// part with a nonnegative coefficient. The constant is excluded: its
  /// coefficient is an unconstrained offset.
  bool is_monotone() const;

  /// b((z - shift) / scale) == factor * basis(z) + offset.
  struct Affine;
  Affine composed_with_affine(double shift, double scale) const;

  bool operator==(const BasisFunction&) const = default;
};

struct BasisFunction::Affine {
  BasisFunction basis;
  double factor = 1.0;
  double offset = 0.0;
};

struct Term {
  double coefficient = 0.0;
  BasisFunction basis;

  bool operator==(const Term&) const = default;
};

/// Linear combination of basis functions of one variable.
class UnivariateFunction {
 public:
  UnivariateFunction() = default;
  UnivariateFunction(std::vector<Term> terms, bool monotone);

  static UnivariateFunction linear(double slope, bool monotone = false);

  const std::vector<Term>& terms() const { return terms_; }
  bool monotone() const { return monotone_; }

  double value(double z) const;
  double derivative(double z) const;
  double second_derivative(double z) const;

  /// True when every term is linear or constant.
  bool is_affine() const;
  /// Sum of linear coefficients and of constant coefficients.
  std::pair<double, double> affine_parts() const;

  /// Returns (g, offset) with f((z - shift) / scale) == g(z) + offset.
  std::pair<UnivariateFunction, double> composed_with_affine(double shift, double scale) const;

  bool operator==(const UnivariateFunction&) const = default;

 private:
  std::vector<Term> terms_;
  bool monotone_ = false;
};

}  // namespace tmap
