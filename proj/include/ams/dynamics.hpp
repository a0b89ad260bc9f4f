#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ams/model.hpp"
#include "ams/rng.hpp"

namespace ams {

/// How the per-step spatial white noise is realized on the grid.
enum class NoiseBasis {
  grid,      // i.i.d. N(0,1) per node, scaled by 1/sqrt(dx)
  spectral,  // sum_{j=0}^{J} G_j e_j(lambda_i), e_0 = 1, e_j = sqrt2 cos(j pi lambda)
};

/// Whether the two heat half-steps of the Strang splitting share one noise draw.
enum class NoiseSharing { shared, independent };

enum class SplittingScheme {
  strang,  // heat half-step, nonlinear flow, heat half-step
  lie,     // Crank-Nicolson full heat step, then nonlinear flow
};

std::string to_string(NoiseBasis b);
std::string to_string(NoiseSharing s);
std::string to_string(SplittingScheme s);
NoiseBasis noise_basis_from_string(const std::string& s);
NoiseSharing noise_sharing_from_string(const std::string& s);
SplittingScheme splitting_scheme_from_string(const std::string& s);

struct StepperConfig {
  ModelParams params;
  NoiseBasis basis = NoiseBasis::grid;
  std::size_t truncation = 0;  // J, used only with the spectral basis
  NoiseSharing sharing = NoiseSharing::shared;
  SplittingScheme scheme = SplittingScheme::strang;
  double heat_solver_tolerance = 0.0;  // reserved; the tridiagonal solve is direct

  /// Throws std::invalid_argument (bad params, or J > N in spectral mode).
  void validate() const;
};

/// Reusable integrator with a cached tridiagonal factorization and scratch buffers.
/// Not thread-safe: use one instance per worker. Output depends only on (cfg, x, key).
class Stepper {
 public:
  explicit Stepper(StepperConfig cfg);

  const StepperConfig& config() const { return cfg_; }

  /// One time step in place: Euler-Maruyama for the chain, splitting scheme for the grid.
  void step(State& x, const RngKey& key);

  void euler_step(State& x, const RngKey& key);
  void allen_cahn_step(State& x, const RngKey& key);

  /// Solves (I - aL) x' = (I + aL) x + scale * noise with a = gamma*dt/4.
  /// `noise` may be empty (treated as zero).
  void heat_half_step(State& x, std::span<const double> noise);

  /// Writes one white-noise field sample for `key` into `out` (length N).
  void gaussian_field(const RngKey& key, std::span<double> out, std::uint32_t stream = 0);

 private:
  void heat_solve(State& x, std::span<const double> noise, double a, double noise_scale);
  void nonlinear_flow(State& x) const;

  StepperConfig cfg_;
  double inv_dx2_ = 0.0;
  double decay_ = 0.0;  // exp(-2 dt) for the Bernoulli flow
  // Thomas factorization of I - aL, one per coefficient in use.
  struct Factor {
    double a = -1.0;
    std::vector<double> upper;  // modified super-diagonal
    std::vector<double> inv_pivot;
  };
  const Factor& factor_for(double a);
  Factor half_, full_;
  std::vector<double> cos_table_;  // N x (J+1), spectral basis only
  std::vector<double> noise_a_, noise_b_, draws_, rhs_, grad_;
};

/// Free-function forms; each builds a temporary Stepper.
State euler_step(const StepperConfig& cfg, const State& x, const RngKey& key);
State heat_half_step(const StepperConfig& cfg, const State& x, const State& noise);
State allen_cahn_step(const StepperConfig& cfg, const State& x, const RngKey& key);
State gaussian_field(const StepperConfig& cfg, const RngKey& key);

/// Exact flow of y' = y - y^3: y / sqrt(y^2 + (1 - y^2) e^{-2t}). Requires t >= 0.
double bernoulli_flow(double y, double t);

}  // namespace ams
