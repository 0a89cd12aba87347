#include "tmap/centers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tmap/error.hpp"

namespace tmap {

double sorted_quantile(std::span<const double> sorted, double alpha) {
  if (sorted.empty()) throw InsufficientSamplesError("quantile of an empty sample");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("quantile level outside [0, 1]");
  const double pos = alpha * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

double empirical_quantile(std::span<const double> samples, double alpha) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, alpha);
}

CentersScales select_centers_scales(std::span<const double> samples, int p, double gamma, bool monotone) {
  if (p < 0) throw ArgumentError("number of basis functions must be nonnegative");
  if (!(gamma > 0.0)) throw ArgumentError("gamma must be positive");
  const std::size_t m = samples.size();
  if (m < static_cast<std::size_t>(p) + 2) {
    throw InsufficientSamplesError("need at least " + std::to_string(p + 2) + " samples for p = " +
                                   std::to_string(p) + ", got " + std::to_string(m));
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const int count = monotone ? p + 2 : p;
  CentersScales out;
  out.centers.resize(count);
  out.scales.resize(count);
  for (int j = 0; j < count; ++j) {
    const double level = monotone ? (j + 1.0) / (p + 3.0) : (j + 1.0) / (p + 1.0);
    out.centers[j] = sorted_quantile(sorted, level);
  }

  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  const double fallback = sd > 0.0 ? gamma * sd : gamma;

  for (int j = 0; j < count; ++j) {
    const double left = out.centers[j > 0 ? j - 1 : 0];
    const double right = out.centers[j + 1 < count ? j + 1 : count - 1];
    const double s = gamma * (right - left) / 2.0;
    out.scales[j] = s > 0.0 ? s : fallback;
  }
  return out;
}

}  // namespace tmap
