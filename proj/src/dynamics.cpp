#include "ams/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ams {

std::string to_string(NoiseBasis b) { return b == NoiseBasis::grid ? "grid" : "spectral"; }
std::string to_string(NoiseSharing s) { return s == NoiseSharing::shared ? "shared" : "independent"; }
std::string to_string(SplittingScheme s) { return s == SplittingScheme::strang ? "strang" : "lie"; }

NoiseBasis noise_basis_from_string(const std::string& s) {
  if (s == "grid") return NoiseBasis::grid;
  if (s == "spectral") return NoiseBasis::spectral;
  throw std::invalid_argument("unknown noise basis '" + s + "' (expected grid or spectral)");
}

NoiseSharing noise_sharing_from_string(const std::string& s) {
  if (s == "shared") return NoiseSharing::shared;
  if (s == "independent") return NoiseSharing::independent;
  throw std::invalid_argument("unknown noise sharing '" + s + "' (expected shared or independent)");
}

SplittingScheme splitting_scheme_from_string(const std::string& s) {
  if (s == "strang") return SplittingScheme::strang;
  if (s == "lie") return SplittingScheme::lie;
  throw std::invalid_argument("unknown splitting scheme '" + s + "' (expected strang or lie)");
}

void StepperConfig::validate() const {
  params.validate();
  if (basis == NoiseBasis::spectral && truncation > params.n)
    throw std::invalid_argument("stepper: noise truncation J = " + std::to_string(truncation) +
                                " exceeds N = " + std::to_string(params.n));
}

double bernoulli_flow(double y, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("bernoulli_flow: t must be >= 0");
  return y / std::sqrt(y * y + (1.0 - y * y) * std::exp(-2.0 * t));
}

Stepper::Stepper(StepperConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const ModelParams& p = cfg_.params;
  const std::size_t n = p.n;
  grad_.resize(n);
  noise_a_.resize(n);
  noise_b_.resize(n);
  if (p.kind != ModelKind::grid) return;

  inv_dx2_ = 1.0 / (p.dx() * p.dx());
  decay_ = std::exp(-2.0 * p.dt);
  rhs_.resize(n);
  if (cfg_.basis == NoiseBasis::spectral) {
    const std::size_t terms = cfg_.truncation + 1;
    draws_.resize(terms);
    cos_table_.resize(n * terms);
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = static_cast<double>(i) * p.dx();
      cos_table_[i * terms] = 1.0;
      for (std::size_t j = 1; j < terms; ++j)
        cos_table_[i * terms + j] =
            std::numbers::sqrt2 * std::cos(static_cast<double>(j) * std::numbers::pi * lambda);
    }
  }
}

const Stepper::Factor& Stepper::factor_for(double a) {
  if (half_.a == a) return half_;
  if (full_.a == a) return full_;
  Factor& f = half_.a < 0.0 ? half_ : full_;
  // I - aL with L the Neumann Laplacian: boundary rows have a single neighbour.
  const std::size_t n = cfg_.params.n;
  const double off = -a * inv_dx2_;
  f.a = a;
  f.upper.assign(n, 0.0);
  f.inv_pivot.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double neighbours = (i == 0 || i + 1 == n) ? 1.0 : 2.0;
    const double diag = 1.0 + a * neighbours * inv_dx2_;
    const double pivot = (i == 0) ? diag : diag - off * f.upper[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw std::logic_error("heat step: singular tridiagonal system");
    f.inv_pivot[i] = 1.0 / pivot;
    f.upper[i] = (i + 1 < n) ? off * f.inv_pivot[i] : 0.0;
  }
  return f;
}

void Stepper::heat_solve(State& x, std::span<const double> noise, double a, double noise_scale) {
  const std::size_t n = x.size();
  const Factor& f = factor_for(a);
  const double off = -a * inv_dx2_;
  const double ai = a * inv_dx2_;
  // rhs = (I + aL) x + noise_scale * noise
  for (std::size_t i = 0; i < n; ++i) {
    double lap;
    if (i == 0) lap = x[1] - x[0];
    else if (i + 1 == n) lap = x[n - 2] - x[n - 1];
    else lap = x[i - 1] - 2.0 * x[i] + x[i + 1];
    rhs_[i] = x[i] + ai * lap;
    if (!noise.empty()) rhs_[i] += noise_scale * noise[i];
  }
  // forward sweep, then back substitution
  x[0] = rhs_[0] * f.inv_pivot[0];
  for (std::size_t i = 1; i < n; ++i) x[i] = (rhs_[i] - off * x[i - 1]) * f.inv_pivot[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= f.upper[i] * x[i + 1];
}

void Stepper::heat_half_step(State& x, std::span<const double> noise) {
  const ModelParams& p = cfg_.params;
  if (p.kind != ModelKind::grid) throw std::invalid_argument("heat_half_step: requires the grid kind");
  check_state(p, x);
  if (!noise.empty() && noise.size() != p.n)
    throw std::invalid_argument("heat_half_step: noise length does not match N");
  heat_solve(x, noise, p.gamma * p.dt / 4.0, 0.5 * std::sqrt(2.0 * p.epsilon * p.dt));
}

void Stepper::gaussian_field(const RngKey& key, std::span<double> out, std::uint32_t stream) {
  const ModelParams& p = cfg_.params;
  if (cfg_.basis == NoiseBasis::grid || p.kind != ModelKind::grid) {
    fill_gaussian(key, out, stream);
    if (p.kind == ModelKind::grid) {
      const double s = 1.0 / std::sqrt(p.dx());
      for (double& v : out) v *= s;
    }
    return;
  }
  const std::size_t terms = cfg_.truncation + 1;
  fill_gaussian(key, draws_, stream);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* row = &cos_table_[i * terms];
    double s = 0.0;
    for (std::size_t j = 0; j < terms; ++j) s += draws_[j] * row[j];
    out[i] = s;
  }
}

void Stepper::nonlinear_flow(State& x) const {
  switch (cfg_.params.potential.kind) {
    case Potential::Kind::double_well:
      for (double& y : x) y = y / std::sqrt(y * y + (1.0 - y * y) * decay_);
      return;
    case Potential::Kind::harmonic: {
      const double f = std::exp(-cfg_.params.dt);
      for (double& y : x) y *= f;
      return;
    }
    case Potential::Kind::free:
      return;
  }
}

void Stepper::euler_step(State& x, const RngKey& key) {
  const ModelParams& p = cfg_.params;
  if (p.kind != ModelKind::chain) throw std::invalid_argument("euler_step: requires the chain kind");
  grad_energy_into(p, x, grad_);
  const double inv_m = 1.0 / p.metric();
  if (p.epsilon > 0.0) {
    fill_gaussian(key, noise_a_);
    const double s = std::sqrt(2.0 * p.epsilon * p.dt);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += -grad_[i] * inv_m * p.dt + s * noise_a_[i];
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= grad_[i] * inv_m * p.dt;
  }
}

void Stepper::allen_cahn_step(State& x, const RngKey& key) {
  const ModelParams& p = cfg_.params;
  if (p.kind != ModelKind::grid) throw std::invalid_argument("allen_cahn_step: requires the grid kind");
  const bool noisy = p.epsilon > 0.0;
  std::span<const double> first, second;
  if (noisy) {
    gaussian_field(key, noise_a_, 0);
    first = noise_a_;
    second = noise_a_;
    if (cfg_.sharing == NoiseSharing::independent && cfg_.scheme == SplittingScheme::strang) {
      gaussian_field(key, noise_b_, 1);
      second = noise_b_;
    }
  }
  const double root = std::sqrt(2.0 * p.epsilon * p.dt);
  if (cfg_.scheme == SplittingScheme::lie) {
    heat_solve(x, first, p.gamma * p.dt / 2.0, root);
    nonlinear_flow(x);
    return;
  }
  const double a = p.gamma * p.dt / 4.0;
  heat_solve(x, first, a, 0.5 * root);
  nonlinear_flow(x);
  heat_solve(x, second, a, 0.5 * root);
}

void Stepper::step(State& x, const RngKey& key) {
  if (cfg_.params.kind == ModelKind::chain) euler_step(x, key);
  else allen_cahn_step(x, key);
}

State euler_step(const StepperConfig& cfg, const State& x, const RngKey& key) {
  if (cfg.params.kind != ModelKind::chain)
    throw std::invalid_argument("euler_step: requires the chain kind");
  check_state(cfg.params, x);
  Stepper s(cfg);
  State y = x;
  s.euler_step(y, key);
  return y;
}

State heat_half_step(const StepperConfig& cfg, const State& x, const State& noise) {
  Stepper s(cfg);
  State y = x;
  s.heat_half_step(y, noise);
  return y;
}

State allen_cahn_step(const StepperConfig& cfg, const State& x, const RngKey& key) {
  if (cfg.params.kind != ModelKind::grid)
    throw std::invalid_argument("allen_cahn_step: requires the grid kind");
  check_state(cfg.params, x);
  Stepper s(cfg);
  State y = x;
  s.allen_cahn_step(y, key);
  return y;
}

State gaussian_field(const StepperConfig& cfg, const RngKey& key) {
  Stepper s(cfg);
  State out(cfg.params.n);
  s.gaussian_field(key, out);
  return out;
}

}  // namespace ams
