#include "ams/bifurcation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace ams::bif {

namespace {

constexpr double boundary_tolerance = 1e-12;

struct Jacobian2 {
  double a, b, c;  // [[a, b], [b, c]]
};

Jacobian2 hessian_2d(double kappa, double x, double y) {
  return {3.0 * x * x - 1.0 + kappa, -kappa, 3.0 * y * y - 1.0 + kappa};
}

// Newton on the coupling-form drift; stops early once the residual is tiny.
void newton_polish(double kappa, double& x, double& y, int max_iter = 5) {
  for (int it = 0; it < max_iter; ++it) {
    const auto g = drift_2d(kappa, x, y);
    if (std::hypot(g[0], g[1]) < 1e-15) return;
    const Jacobian2 h = hessian_2d(kappa, x, y);
    const double det = h.a * h.c - h.b * h.b;
    if (std::abs(det) < 1e-300) return;
    x -= (h.c * g[0] - h.b * g[1]) / det;
    y -= (-h.b * g[0] + h.a * g[1]) / det;
  }
}

void push_unique(std::vector<CriticalPoint>& pts, CriticalPoint p) {
  for (const auto& q : pts)
    if (std::hypot(q.location[0] - p.location[0], q.location[1] - p.location[1]) < 1e-8) return;
  pts.push_back(std::move(p));
}

}  // namespace

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::minimum: return "minimum";
    case PointClass::saddle: return "saddle";
    case PointClass::maximum: return "maximum";
    case PointClass::degenerate: return "degenerate";
  }
  return "?";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::single_saddle: return "single-saddle";
    case Regime::two_saddles: return "two-saddles";
    case Regime::four_saddles: return "four-saddles";
  }
  return "?";
}

std::vector<double> drift_2d(double kappa, double x, double y) {
  return {x * x * x - x + kappa * (x - y), y * y * y - y - kappa * (x - y)};
}

CriticalPoint classify_point(double kappa, double x, double y) {
  newton_polish(kappa, x, y);
  CriticalPoint p;
  p.location = {x, y};
  const auto g = drift_2d(kappa, x, y);
  p.residual = std::hypot(g[0], g[1]);

  const Jacobian2 h = hessian_2d(kappa, x, y);
  Eigen::Matrix2d m;
  m << h.a, h.b, h.b, h.c;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m, Eigen::EigenvaluesOnly);
  p.hessian_eigenvalues = {es.eigenvalues()(0), es.eigenvalues()(1)};

  int negative = 0;
  bool zero = false;
  for (double l : p.hessian_eigenvalues) {
    if (std::abs(l) < zero_eigenvalue_tolerance) zero = true;
    else if (l < 0.0) ++negative;
  }
  p.saddle_index = negative;
  if (zero) p.classification = PointClass::degenerate;
  else if (negative == 0) p.classification = PointClass::minimum;
  else if (negative == 2) p.classification = PointClass::maximum;
  else p.classification = PointClass::saddle;
  return p;
}

std::vector<CriticalPoint> critical_points_2d(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("critical_points_2d: kappa must be > 0");

  std::vector<CriticalPoint> pts;
  push_unique(pts, classify_point(kappa, 0.0, 0.0));
  push_unique(pts, classify_point(kappa, 1.0, 1.0));
  push_unique(pts, classify_point(kappa, -1.0, -1.0));

  // x = -y branch: x (x^2 + 2 kappa - 1) = 0.
  if (kappa < 0.5) {
    const double r = std::sqrt(1.0 - 2.0 * kappa);
    push_unique(pts, classify_point(kappa, r, -r));
    push_unique(pts, classify_point(kappa, -r, r));
  }

  // x != -y branch: (x^2 - 1)(x^4 - (1-kappa) x^2 + kappa^2) = 0 on x^2 - xy + y^2 = 1,
  // real off the diagonal when kappa < 1/3.
  if (kappa < 1.0 / 3.0) {
    const double disc = std::sqrt((kappa + 1.0) * (1.0 - 3.0 * kappa));
    for (double inner : {1.0 - kappa + disc, 1.0 - kappa - disc}) {
      const double a = std::sqrt(inner / 2.0);
      for (double x : {a, -a}) {
        const double y = x * (x * x - 1.0 + kappa) / kappa;
        push_unique(pts, classify_point(kappa, x, y));
      }
    }
  }
  return pts;
}

double normal_form_threshold(double kappa) {
  if (kappa >= 0.5) return 0.0;
  return std::sqrt((1.0 - 2.0 * kappa) / 3.0);
}

double normal_form_full(double rho, double amplitude, double kappa) {
  const double a2 = amplitude * amplitude;
  const double r2 = rho * rho;
  return 0.5 * a2 * a2 - a2 + 0.5 * r2 * r2 - r2 * (1.0 - 2.0 * kappa) + 3.0 * r2 * a2;
}

NormalFormEval normal_form_2d(double amplitude, double kappa) {
  if (!std::isfinite(amplitude) || !std::isfinite(kappa))
    throw std::invalid_argument("normal_form_2d: non-finite input");
  NormalFormEval e;
  e.amplitude = amplitude;
  const double a2 = amplitude * amplitude;
  if (std::abs(amplitude) < normal_form_threshold(kappa)) {
    e.branch = Branch::inner;
    e.value = -0.5 + 2.0 * kappa + 2.0 * a2 - 2.0 * kappa * kappa - 6.0 * a2 * kappa - 4.0 * a2 * a2;
  } else {
    e.branch = Branch::outer;
    e.value = 0.5 * a2 * a2 - a2;
  }
  return e;
}

double origin_spectrum_scale(std::size_t n) {
  if (n == 2) return 2.0;
  if (n == 4) return 1.0;
  throw std::invalid_argument("hessian_spectrum_origin: only N = 2 and N = 4 are supported");
}

std::vector<double> hessian_spectrum_origin(std::size_t n, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("hessian_spectrum_origin: gamma must be > 0");
  std::vector<double> sp;
  if (n == 2) {
    const double kappa = kappa_from_gamma(2, gamma);
    sp = {-1.0, 2.0 * kappa - 1.0};
  } else if (n == 4) {
    const double s2 = std::numbers::sqrt2;
    sp = {-0.25, -0.25 + 8.0 * gamma, (8.0 + 4.0 * s2) * gamma - 0.25,
          (8.0 - 4.0 * s2) * gamma - 0.25};
  } else {
    throw std::invalid_argument("hessian_spectrum_origin: only N = 2 and N = 4 are supported");
  }
  std::sort(sp.begin(), sp.end());
  return sp;
}

Regime classify_regime_2d(double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("classify_regime_2d: kappa must be > 0");
  if (std::abs(kappa - 0.5) < boundary_tolerance || std::abs(kappa - 1.0 / 3.0) < boundary_tolerance)
    throw DegenerateParameter("kappa = " + std::to_string(kappa) + " is a bifurcation boundary");
  if (kappa > 0.5) return Regime::single_saddle;
  if (kappa > 1.0 / 3.0) return Regime::two_saddles;
  return Regime::four_saddles;
}

double normal_form_4(double amplitude, double gamma) {
  const ModelParams p = ModelParams::chain(4, gamma, 0.0, 1.0);
  const double s2 = std::numbers::sqrt2;
  const double e1[4] = {1.0, -1.0 - s2, 1.0 + s2, -1.0};
  auto along = [&](double rho) {
    State x(4);
    for (int i = 0; i < 4; ++i) x[i] = amplitude * e1[i];
    x[0] += rho;
    x[3] += rho;
    return energy(p, x);
  };
  // The restriction to rho is a quartic: recover its coefficients from five
  // samples, then take the best real root of its derivative.
  const double h = 1.0;
  const double f0 = along(0.0), fp = along(h), fm = along(-h), f2p = along(2 * h), f2m = along(-2 * h);
  const double c4 = (f2p + f2m - 4.0 * (fp + fm) + 6.0 * f0) / 24.0;
  const double c2 = (fp + fm - 2.0 * f0) / 2.0 - c4;
  const double c3 = ((f2p - f2m) - 2.0 * (fp - fm)) / 12.0;
  const double c1 = (fp - fm) / 2.0 - c3;
  // derivative 4 c4 r^3 + 3 c3 r^2 + 2 c2 r + c1 = 0
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  const double lead = 4.0 * c4;
  companion(0, 0) = -3.0 * c3 / lead;
  companion(0, 1) = -2.0 * c2 / lead;
  companion(0, 2) = -c1 / lead;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
  double best = f0;
  for (int i = 0; i < 3; ++i) {
    const auto r = es.eigenvalues()(i);
    if (std::abs(r.imag()) < 1e-9) best = std::min(best, along(r.real()));
  }
  return best;
}

}  // namespace ams::bif
