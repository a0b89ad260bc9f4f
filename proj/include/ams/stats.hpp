#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ams::stats {

double mean(std::span<const double> v);
/// Sample standard deviation with the n-1 denominator; 0 for fewer than two values.
double sample_std(std::span<const double> v);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. Needs >= 2 distinct x values.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Linear-interpolation quantile (type 7), q in [0, 1].
double quantile(std::vector<double> v, double q);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::uint64_t> counts;

  double center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

/// Equal-width histogram. Bin count from the Freedman-Diaconis rule unless given.
Histogram histogram(std::span<const double> data, std::optional<std::size_t> bins = std::nullopt);
std::size_t freedman_diaconis_bins(std::span<const double> data);

/// Hartigan's dip statistic of unimodality, in [1/(2n), 1/4].
double dip_statistic(std::vector<double> data);

struct DipTest {
  double dip = 0.0;
  double p_value = 1.0;
};

/// Dip test with a Monte Carlo p-value against `simulations` uniform samples of the same size.
DipTest dip_test(std::span<const double> data, std::size_t simulations = 2000, std::uint64_t seed = 0);

}  // namespace ams::stats
