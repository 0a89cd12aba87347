#pragma once

#include <span>
#include <vector>

namespace tmap {

/// Quantile of the sample at level alpha in [0, 1], linear interpolation
/// between order statistics (alpha maps to position alpha * (M - 1)).
double empirical_quantile(std::span<const double> samples, double alpha);
/// Same, for an already sorted sample.
double sorted_quantile(std::span<const double> sorted, double alpha);

struct CentersScales {
  std::vector<double> centers;
  std::vector<double> scales;
};

/// Non-monotone case: p centers at the j/(p+1) quantiles.
/// Monotone case: p+2 centers at the (j+1)/(p+3) quantiles, j = 0..p+1.
/// Scales are gamma times half the distance between neighbouring centers,
/// with the end centers repeated; a zero scale becomes gamma * std.
CentersScales select_centers_scales(std::span<const double> samples, int p, double gamma, bool monotone);

}  // namespace tmap
