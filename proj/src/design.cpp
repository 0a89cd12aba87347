#include "design.hpp"

#include <cmath>
#include <string>

#include "tmap/centers.hpp"
#include "tmap/error.hpp"

namespace tmap::detail {

Eigen::VectorXd ComponentDesign::identity_parameters() const {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count()));
  if (affine_monotone()) {
    theta[monotone_begin()] = 1.0;
  } else {
    // Outer sigmoids alone have slope one in both tails.
    theta[monotone_begin()] = 1.0;
    theta[parameter_count() - 1] = 1.0;
  }
  return theta;
}

void ComponentDesign::evaluate(const Eigen::MatrixXd& samples, Eigen::MatrixXd& values,
                               Eigen::MatrixXd& last_derivatives) const {
  const Eigen::Index m = samples.rows();
  const auto p = static_cast<Eigen::Index>(parameter_count());
  const auto k = static_cast<Eigen::Index>(monotone.size());
  values.resize(m, p);
  last_derivatives.resize(m, k);
  const std::size_t last_slot = active.size() - 1;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t f = 0; f < offdiag.size(); ++f) {
      const auto& feat = offdiag[f];
      const double z = (samples(i, active[feat.slot]) - shift[feat.slot]) / scale[feat.slot];
      values(i, f) = feat.basis.value(z);
    }
    values(i, constant_slot()) = 1.0;
    const double z = (samples(i, active[last_slot]) - shift[last_slot]) / scale[last_slot];
    for (Eigen::Index j = 0; j < k; ++j) {
      values(i, monotone_begin() + j) = monotone[j].value(z);
      last_derivatives(i, j) = monotone[j].derivative(z);
    }
  }
}

MapComponent ComponentDesign::to_component(const Eigen::VectorXd& theta, double output_shift,
                                           double output_scale) const {
  const std::size_t last_slot = active.size() - 1;
  double constant = output_shift + output_scale * theta[constant_slot()];

  std::vector<NonmonotonePart> parts;
  for (std::size_t slot = 0; slot < last_slot; ++slot) {
    std::vector<Term> terms;
    for (std::size_t f = 0; f < offdiag.size(); ++f) {
      if (offdiag[f].slot == slot) terms.push_back({output_scale * theta[f], offdiag[f].basis});
    }
    const auto [g, off] = UnivariateFunction(std::move(terms), false).composed_with_affine(shift[slot], scale[slot]);
    constant += off;
    parts.push_back({active[slot], g});
  }

  std::vector<Term> mono_terms;
  for (std::size_t j = 0; j < monotone.size(); ++j) {
    mono_terms.push_back({std::max(0.0, output_scale * theta[monotone_begin() + j]), monotone[j]});
  }
  const auto [mono, off] =
      UnivariateFunction(std::move(mono_terms), true).composed_with_affine(shift[last_slot], scale[last_slot]);
  constant += off;

  MapComponent comp(index, active[last_slot], std::move(parts), mono, constant);
  comp.set_reference(shift[last_slot], scale[last_slot]);
  return comp;
}

ComponentDesign make_design(const Eigen::MatrixXd& samples, std::size_t index, std::span<const std::size_t> active,
                            const MapSpec& spec, bool sigmoid_monotone, bool standardize) {
  if (active.empty()) throw ArgumentError("component " + std::to_string(index) + " has no inputs");
  ComponentDesign d;
  d.index = index;
  d.active.assign(active.begin(), active.end());
  const Eigen::Index m = samples.rows();
  if (m < 2) throw InsufficientSamplesError("need at least two samples to fit a map component");

  std::vector<std::vector<double>> standardized(d.active.size());
  for (std::size_t slot = 0; slot < d.active.size(); ++slot) {
    const std::size_t col = d.active[slot];
    if (col >= static_cast<std::size_t>(samples.cols())) {
      throw ArgumentError("input position " + std::to_string(col) + " outside the sample matrix");
    }
    double mean = 0.0;
    double sd = 1.0;
    if (standardize) {
      mean = samples.col(static_cast<Eigen::Index>(col)).mean();
      const double var = (samples.col(static_cast<Eigen::Index>(col)).array() - mean).square().mean();
      sd = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    d.shift.push_back(mean);
    d.scale.push_back(sd);
    auto& z = standardized[slot];
    z.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) z[i] = (samples(i, static_cast<Eigen::Index>(col)) - mean) / sd;
  }

  const std::size_t last_slot = d.active.size() - 1;
  for (std::size_t slot = 0; slot < last_slot; ++slot) {
    d.offdiag.push_back({slot, BasisFunction::linear()});
    if (spec.p > 0) {
      const auto cs = select_centers_scales(standardized[slot], spec.p, spec.gamma, false);
      for (std::size_t j = 0; j < cs.centers.size(); ++j) {
        d.offdiag.push_back({slot, BasisFunction::rbf(cs.centers[j], cs.scales[j])});
      }
    }
  }
  if (sigmoid_monotone && spec.p > 0) {
    const auto cs = select_centers_scales(standardized[last_slot], spec.p, spec.gamma, true);
    const std::size_t count = cs.centers.size();
    d.monotone.push_back(BasisFunction::sigmoid_left(cs.centers[0], cs.scales[0]));
    for (std::size_t j = 1; j + 1 < count; ++j) {
      d.monotone.push_back(BasisFunction::sigmoid_bump(cs.centers[j], cs.scales[j]));
    }
    d.monotone.push_back(BasisFunction::sigmoid_right(cs.centers[count - 1], cs.scales[count - 1]));
  } else {
    d.monotone.push_back(BasisFunction::linear());
  }
  return d;
}

}  // namespace tmap::detail
