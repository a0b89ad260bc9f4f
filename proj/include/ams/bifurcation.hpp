#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ams/model.hpp"

namespace ams::bif {

/// Parameter sits exactly on a regime boundary, where the critical set is degenerate.
class DegenerateParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class PointClass { minimum, saddle, maximum, degenerate };

std::string to_string(PointClass c);

struct CriticalPoint {
  State location;
  std::vector<double> hessian_eigenvalues;  // ascending
  PointClass classification = PointClass::degenerate;
  int saddle_index = 0;  // number of negative eigenvalues
  double residual = 0.0;
};

inline constexpr double zero_eigenvalue_tolerance = 1e-9;

/// Drift of the two-particle system in coupling form:
/// (x^3 - x + kappa (x - y), y^3 - y - kappa (x - y)).
/// Equals 2 grad E for the N = 2 chain with kappa = 4 gamma.
std::vector<double> drift_2d(double kappa, double x, double y);

/// Critical points of the two-particle system, polished by Newton and classified
/// by the Hessian of the coupling-form energy. Throws std::invalid_argument for kappa <= 0.
std::vector<CriticalPoint> critical_points_2d(double kappa);

CriticalPoint classify_point(double kappa, double x, double y);

enum class Branch { inner, outer };

struct NormalFormEval {
  double amplitude = 0.0;
  double value = 0.0;
  Branch branch = Branch::outer;
};

/// Reduced energy along (1,1) after minimizing over the (1,-1) direction.
NormalFormEval normal_form_2d(double amplitude, double kappa);
/// |A| below which the inner branch applies; 0 when kappa >= 1/2.
double normal_form_threshold(double kappa);
/// The unreduced two-variable energy in amplitude/transverse coordinates.
double normal_form_full(double rho, double amplitude, double kappa);

/// Closed-form Hessian spectrum of the chain energy at the origin, ascending.
/// For N = 2 it is reported in coupling form {-1, 2 kappa - 1} with kappa = 4 gamma,
/// i.e. the spectrum of origin_spectrum_scale(2) * hessian_energy. For N = 4 it is the
/// spectrum of hessian_energy itself. Other N throw std::invalid_argument.
std::vector<double> hessian_spectrum_origin(std::size_t n, double gamma);
double origin_spectrum_scale(std::size_t n);

enum class Regime { single_saddle, two_saddles, four_saddles };

std::string to_string(Regime r);

/// Throws DegenerateParameter at kappa = 1/3 or 1/2, std::invalid_argument for kappa <= 0.
Regime classify_regime_2d(double kappa);

/// Four-atom reduced energy along e1 = (1, -1-sqrt2, 1+sqrt2, -1), minimized over the
/// transverse direction (1,0,0,1). Evaluated from the model energy itself.
double normal_form_4(double amplitude, double gamma);

}  // namespace ams::bif
