#include "ams/model.hpp"

#include <cmath>
#include <string>

namespace ams {

namespace {

double dw_value(double x) {
  const double x2 = x * x;
  return 0.25 * x2 * x2 - 0.5 * x2;
}
double dw_d1(double x) { return x * x * x - x; }
double dw_d2(double x) { return 3.0 * x * x - 1.0; }
double dw_d3(double x) { return 6.0 * x; }

double quad_value(double x) { return 0.5 * x * x; }
double quad_d1(double x) { return x; }
double quad_d2(double) { return 1.0; }
double zero(double) { return 0.0; }

// Sum of squared nearest-neighbour differences; the ghost nodes copy the
// boundary values, so the two boundary terms drop out.
double squared_differences(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = x[i + 1] - x[i];
    s += d * d;
  }
  return s;
}

}  // namespace

Potential Potential::double_well() {
  return {Kind::double_well, dw_value, dw_d1, dw_d2, dw_d3, 2.5};
}

Potential Potential::harmonic() {
  return {Kind::harmonic, quad_value, quad_d1, quad_d2, zero, 2.0};
}

Potential Potential::free() { return {Kind::free, zero, zero, zero, zero, 2.0}; }

std::string to_string(ModelKind kind) {
  return kind == ModelKind::chain ? "chain" : "grid";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "chain") return ModelKind::chain;
  if (s == "grid" || s == "allen-cahn" || s == "allen_cahn") return ModelKind::grid;
  throw std::invalid_argument("unknown model kind '" + s + "' (expected chain or grid)");
}

double ModelParams::dx() const {
  if (kind == ModelKind::grid) return 1.0 / static_cast<double>(n - 1);
  return 1.0 / static_cast<double>(n);
}

double ModelParams::weight() const { return dx(); }

double ModelParams::metric() const { return kind == ModelKind::grid ? dx() : 1.0; }

void ModelParams::validate() const {
  // A single atom is admitted for the chain: the coupling vanishes and the
  // model is the scalar overdamped Langevin equation in V.
  const std::size_t min_n = kind == ModelKind::grid ? 2 : 1;
  if (n < min_n)
    throw std::invalid_argument("model: n must be >= " + std::to_string(min_n) + " for the " +
                                to_string(kind) + " kind");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("model: gamma must be finite and >= 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("model: epsilon must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("model: dt must be > 0");
  if (potential.value == nullptr || potential.d1 == nullptr || potential.d2 == nullptr)
    throw std::invalid_argument("model: potential callbacks are not set");
}

ModelParams ModelParams::grid_with_spacing(double dx, double gamma, double epsilon, double dt) {
  if (!(dx > 0.0) || dx > 1.0) throw std::invalid_argument("model: dx must lie in (0, 1]");
  const double cells = 1.0 / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * cells)
    throw std::invalid_argument("model: 1/dx must be an integer, got dx = " + std::to_string(dx));
  ModelParams p;
  p.kind = ModelKind::grid;
  p.n = static_cast<std::size_t>(rounded) + 1;
  p.gamma = gamma;
  p.epsilon = epsilon;
  p.dt = dt;
  p.validate();
  return p;
}

ModelParams ModelParams::chain(std::size_t n, double gamma, double epsilon, double dt) {
  ModelParams p;
  p.kind = ModelKind::chain;
  p.n = n;
  p.gamma = gamma;
  p.epsilon = epsilon;
  p.dt = dt;
  p.validate();
  return p;
}

double kappa_from_gamma(std::size_t n, double gamma) {
  const double nn = static_cast<double>(n);
  return gamma * nn * nn;
}

double gamma_from_kappa(std::size_t n, double kappa) {
  const double nn = static_cast<double>(n);
  return kappa / (nn * nn);
}

double SymTridiagonal::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return diag[i];
  if (i + 1 == j) return off[i];
  if (j + 1 == i) return off[j];
  return 0.0;
}

void check_state(const ModelParams& params, std::span<const double> x) {
  if (x.size() != params.n)
    throw InvalidState("state has length " + std::to_string(x.size()) + ", expected " +
                       std::to_string(params.n));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw InvalidState("state entry " + std::to_string(i) + " is not finite");
}

EnergySplit energy_split(const ModelParams& params, std::span<const double> x) {
  check_state(params, x);
  const double w = params.weight();
  EnergySplit s;
  s.dirichlet = squared_differences(x) / (2.0 * w);
  double v = 0.0;
  for (double xi : x) v += params.potential.value(xi);
  s.potential = w * v;
  return s;
}

double energy(const ModelParams& params, std::span<const double> x) {
  const EnergySplit s = energy_split(params, x);
  return params.gamma * s.dirichlet + s.potential;
}

void grad_energy_into(const ModelParams& params, std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  const double w = params.weight();
  const double c = params.gamma / w;
  const auto dv = params.potential.d1;
  if (n == 1) {
    out[0] = w * dv(x[0]);
    return;
  }
  out[0] = c * (x[0] - x[1]) + w * dv(x[0]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = c * (2.0 * x[i] - x[i - 1] - x[i + 1]) + w * dv(x[i]);
  out[n - 1] = c * (x[n - 1] - x[n - 2]) + w * dv(x[n - 1]);
}

State grad_energy(const ModelParams& params, std::span<const double> x) {
  check_state(params, x);
  State g(x.size());
  grad_energy_into(params, x, g);
  return g;
}

SymTridiagonal hessian_energy(const ModelParams& params, std::span<const double> x) {
  check_state(params, x);
  const std::size_t n = x.size();
  const double w = params.weight();
  const double c = params.gamma / w;
  SymTridiagonal h;
  h.diag.resize(n);
  h.off.assign(n > 0 ? n - 1 : 0, -c);
  for (std::size_t i = 0; i < n; ++i) {
    const double neighbours = (n == 1) ? 0.0 : ((i == 0 || i + 1 == n) ? 1.0 : 2.0);
    h.diag[i] = c * neighbours + w * params.potential.d2(x[i]);
  }
  return h;
}

double log_gibbs_density_unnormalized(const ModelParams& params, std::span<const double> x) {
  if (params.epsilon == 0.0)
    throw std::domain_error("log Gibbs density: epsilon = 0 (division by zero)");
  return -energy(params, x) / params.epsilon;
}

double rate_functional(const ModelParams& params, std::span<const State> trajectory, double dt) {
  if (trajectory.size() < 2)
    throw std::invalid_argument("rate functional: trajectory needs at least 2 states");
  if (!(dt > 0.0)) throw std::invalid_argument("rate functional: dt must be > 0");
  const double m = params.metric();
  State g(params.n);
  double action = 0.0;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    const State& a = trajectory[k];
    const State& b = trajectory[k + 1];
    check_state(params, a);
    check_state(params, b);
    grad_energy_into(params, a, g);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double r = (b[i] - a[i]) / dt + g[i] / m;
      s += r * r;
    }
    action += s * dt;
  }
  return 0.25 * m * action;
}

}  // namespace ams
