#include "ams/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ams::stats {

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("least_squares: need at least 2 points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return f;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::size_t freedman_diaconis_bins(std::span<const double> data) {
  if (data.empty()) throw std::invalid_argument("histogram: empty input");
  std::vector<double> v(data.begin(), data.end());
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  if (range == 0.0 || iqr == 0.0) return 1;
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(range / width)));
}

Histogram histogram(std::span<const double> data, std::optional<std::size_t> bins) {
  if (data.empty()) throw std::invalid_argument("histogram: empty input");
  const std::size_t nb = bins ? *bins : freedman_diaconis_bins(data);
  if (nb == 0) throw std::invalid_argument("histogram: bin count must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb);
  h.counts.assign(nb, 0);
  for (double v : data) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(nb));
    ++h.counts[std::min(b, nb - 1)];
  }
  return h;
}

}  // namespace ams::stats
