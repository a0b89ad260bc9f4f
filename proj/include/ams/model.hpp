#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ams {

/// Configuration vector: atom positions for the chain, nodal values for the grid.
using State = std::vector<double>;

/// Raised when a state has the wrong length or non-finite entries.
class InvalidState : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scalar confining potential V with its first three derivatives.
///
/// `growth_exponent` is the exponent alpha in |V^(j)(x)| <= C(|x|^(2 alpha - 1) + 1).
struct Potential {
  enum class Kind { double_well, harmonic, free };

  Kind kind = Kind::double_well;
  double (*value)(double) = nullptr;
  double (*d1)(double) = nullptr;
  double (*d2)(double) = nullptr;
  double (*d3)(double) = nullptr;
  double growth_exponent = 2.5;

  /// V(x) = x^4/4 - x^2/2.
  static Potential double_well();
  /// V(x) = x^2/2, the Ornstein-Uhlenbeck case.
  static Potential harmonic();
  /// V = 0, used to isolate the linear part of the dynamics.
  static Potential free();
};

enum class ModelKind { chain, grid };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Physical and discretization parameters.
///
/// For the chain, the N atoms carry weight 1/N. For the grid, node i sits at
/// lambda_i = i * dx with dx = 1/(N-1), and each node carries weight dx.
/// Both kinds share E(x) = gamma/(2w) * sum (x_{i+1}-x_i)^2 + w * sum V(x_i).
struct ModelParams {
  ModelKind kind = ModelKind::chain;
  std::size_t n = 2;
  double gamma = 1.0;
  double epsilon = 0.0;
  double dt = 0.01;
  Potential potential = Potential::double_well();

  /// Mesh size of the grid kind; 1/N for the chain (its quadrature weight).
  double dx() const;
  /// Quadrature weight w attached to each site.
  double weight() const;
  /// Factor m such that the dynamics drift is -grad E / m (1 for the chain, dx for the grid).
  double metric() const;
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Grid parameters with N = 1/dx + 1 nodes; dx must divide [0,1] evenly.
  static ModelParams grid_with_spacing(double dx, double gamma, double epsilon, double dt);
  static ModelParams chain(std::size_t n, double gamma, double epsilon, double dt);
};

/// Coupling in the drift-normalized form N * grad E = V'(x) + kappa * (graph Laplacian) x
/// for the chain. For N = 2 this is the system x^3 - x + kappa (x - y).
double kappa_from_gamma(std::size_t n, double gamma);
double gamma_from_kappa(std::size_t n, double kappa);

struct EnergySplit {
  double dirichlet = 0.0;
  double potential = 0.0;
};

/// Symmetric tridiagonal matrix stored by its diagonal and first off-diagonal.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
  double operator()(std::size_t i, std::size_t j) const;
};

double energy(const ModelParams& params, std::span<const double> x);
EnergySplit energy_split(const ModelParams& params, std::span<const double> x);

State grad_energy(const ModelParams& params, std::span<const double> x);
/// Allocation-free form of grad_energy; `out` must have length N. No validation.
void grad_energy_into(const ModelParams& params, std::span<const double> x, std::span<double> out);

SymTridiagonal hessian_energy(const ModelParams& params, std::span<const double> x);

/// -E(x)/epsilon; throws std::domain_error when epsilon == 0.
double log_gibbs_density_unnormalized(const ModelParams& params, std::span<const double> x);

/// Discrete Freidlin-Wentzell action (m/4) sum_k |(x_{k+1}-x_k)/dt - b(x_k)|^2 dt,
/// where b = -grad E / m is the model drift and m its metric factor.
/// Vanishes along the deterministic downhill flow.
double rate_functional(const ModelParams& params, std::span<const State> trajectory, double dt);

/// Throws InvalidState unless x has length N and finite entries.
void check_state(const ModelParams& params, std::span<const double> x);

}  // namespace ams
