#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>

#include "ams/bifurcation.hpp"

using namespace ams;
using namespace ams::bif;

namespace {

std::vector<double> dense_spectrum(const SymTridiagonal& h, double scale) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = scale * h(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

std::size_t count(const std::vector<CriticalPoint>& pts, PointClass c) {
  return static_cast<std::size_t>(
      std::count_if(pts.begin(), pts.end(), [&](const CriticalPoint& p) { return p.classification == c; }));
}

bool contains(const std::vector<CriticalPoint>& pts, double x, double y) {
  return std::any_of(pts.begin(), pts.end(), [&](const CriticalPoint& p) {
    return std::hypot(p.location[0] - x, p.location[1] - y) < 1e-9;
  });
}

}  // namespace

TEST_SUITE("bifurcation") {
  TEST_CASE("coupling-form drift is twice the chain gradient") {
    for (double kappa : {0.1, 0.4, 0.9}) {
      const auto p = ModelParams::chain(2, gamma_from_kappa(2, kappa), 0.0, 0.01);
      const State x{0.37, -1.2};
      const State g = grad_energy(p, x);
      const auto d = drift_2d(kappa, x[0], x[1]);
      CHECK(d[0] == doctest::Approx(2 * g[0]).epsilon(1e-14));
      CHECK(d[1] == doctest::Approx(2 * g[1]).epsilon(1e-14));
      for (double rho : {-0.7, 0.1, 0.9})
        for (double a : {-0.3, 0.0, 0.8})
          CHECK(normal_form_full(rho, a, kappa) == doctest::Approx(2 * energy(p, State{a + rho, a - rho})));
    }
  }

  TEST_CASE("origin spectrum matches a dense eigensolve") {
    for (double kappa : {0.2, 0.4, 0.6, 0.5}) {
      const double gamma = gamma_from_kappa(2, kappa);
      const auto h = hessian_energy(ModelParams::chain(2, gamma, 0.0, 0.01), State{0.0, 0.0});
      const auto ref = dense_spectrum(h, origin_spectrum_scale(2));
      const auto sp = hessian_spectrum_origin(2, gamma);
      REQUIRE(sp.size() == 2);
      for (int i = 0; i < 2; ++i) CHECK(std::abs(sp[i] - ref[i]) < 1e-10);
    }
    CHECK(hessian_spectrum_origin(2, gamma_from_kappa(2, 0.5)) == std::vector<double>{-1.0, 0.0});
    for (double gamma : {1.0 / 32, 1.0 / 16, 1.0 / 8}) {
      const auto h = hessian_energy(ModelParams::chain(4, gamma, 0.0, 0.01), State(4, 0.0));
      const auto ref = dense_spectrum(h, origin_spectrum_scale(4));
      const auto sp = hessian_spectrum_origin(4, gamma);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(sp[i] - ref[i]) < 1e-10);
    }
    CHECK_THROWS_AS(hessian_spectrum_origin(3, 0.1), std::invalid_argument);
  }

  TEST_CASE("four-atom spectrum at gamma = 1/16") {
    const auto sp = hessian_spectrum_origin(4, 1.0 / 16);
    const double s2 = std::numbers::sqrt2;
    CHECK(sp[0] == doctest::Approx(-0.25));
    CHECK(sp[1] == doctest::Approx(0.25 - s2 / 4));  // negative: about -0.1036
    CHECK(sp[2] == doctest::Approx(0.25));
    CHECK(sp[3] == doctest::Approx(0.25 + s2 / 4));
    CHECK(sp[1] < 0.0);
  }

  TEST_CASE("four-atom degeneracy where the top mode crosses zero") {
    const double gamma = 1.0 / (16.0 * (2.0 + std::numbers::sqrt2));
    const auto sp = hessian_spectrum_origin(4, gamma);
    const auto ref = dense_spectrum(hessian_energy(ModelParams::chain(4, gamma, 0.0, 0.01), State(4, 0.0)), 1.0);
    CHECK(std::abs(sp.back()) < 1e-12);
    CHECK(std::abs(ref.back()) < 1e-12);
  }

  TEST_CASE("critical point counts per regime") {
    CHECK(critical_points_2d(0.6).size() == 3);
    CHECK(critical_points_2d(0.4).size() == 5);
    CHECK(critical_points_2d(0.2).size() == 9);
    CHECK(critical_points_2d(0.45).size() == 5);
    CHECK(critical_points_2d(1.0 / 32).size() == 9);
    CHECK_THROWS_AS(critical_points_2d(0.0), std::invalid_argument);
    CHECK_THROWS_AS(critical_points_2d(-1.0), std::invalid_argument);
  }

  TEST_CASE("classification at kappa = 0.6") {
    const auto pts = critical_points_2d(0.6);
    CHECK(count(pts, PointClass::minimum) == 2);
    CHECK(count(pts, PointClass::saddle) == 1);
    const auto origin = classify_point(0.6, 0.0, 0.0);
    CHECK(origin.classification == PointClass::saddle);
    CHECK(origin.hessian_eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(origin.hessian_eigenvalues[1] == doctest::Approx(0.2));
  }

  TEST_CASE("anti-diagonal saddles at kappa = 0.4") {
    const auto pts = critical_points_2d(0.4);
    const double r = std::sqrt(0.2);
    REQUIRE(contains(pts, r, -r));
    REQUIRE(contains(pts, -r, r));
    const auto p = classify_point(0.4, r, -r);
    CHECK(p.classification == PointClass::saddle);
    CHECK(p.hessian_eigenvalues[0] == doctest::Approx(-0.4));
    CHECK(p.hessian_eigenvalues[1] == doctest::Approx(0.4));
    CHECK(classify_point(0.4, 0.0, 0.0).classification == PointClass::maximum);
  }

  TEST_CASE("four-saddle regime structure") {
    const auto pts = critical_points_2d(0.2);
    CHECK(count(pts, PointClass::minimum) == 4);
    CHECK(count(pts, PointClass::saddle) == 4);
    CHECK(count(pts, PointClass::maximum) == 1);
  }

  TEST_CASE("residuals, Newton fixed points and symmetry closure") {
    for (double kappa : {0.05, 1.0 / 32, 0.2, 0.3, 0.4, 0.6, 2.0}) {
      const auto pts = critical_points_2d(kappa);
      for (const auto& p : pts) {
        const double x = p.location[0], y = p.location[1];
        CHECK(p.residual < 1e-10);
        CHECK(std::hypot(drift_2d(kappa, x, y)[0], drift_2d(kappa, x, y)[1]) < 1e-10);
        CHECK(contains(pts, -x, -y));
        CHECK(contains(pts, y, x));
        // One more Newton step leaves the point in place.
        const auto again = classify_point(kappa, x, y);
        CHECK(std::hypot(again.location[0] - x, again.location[1] - y) < 1e-10);
        // Classification consistent with eigenvalue signs.
        const auto& ev = p.hessian_eigenvalues;
        if (ev[0] > zero_eigenvalue_tolerance) CHECK(p.classification == PointClass::minimum);
        if (ev[1] < -zero_eigenvalue_tolerance) CHECK(p.classification == PointClass::maximum);
      }
    }
  }

  TEST_CASE("regime classification") {
    CHECK(classify_regime_2d(0.6) == Regime::single_saddle);
    CHECK(classify_regime_2d(0.4) == Regime::two_saddles);
    CHECK(classify_regime_2d(0.2) == Regime::four_saddles);
    CHECK(classify_regime_2d(0.25) == Regime::four_saddles);
    CHECK_THROWS_AS(classify_regime_2d(0.5), DegenerateParameter);
    CHECK_THROWS_AS(classify_regime_2d(1.0 / 3.0), DegenerateParameter);
    CHECK_THROWS_AS(classify_regime_2d(0.0), std::invalid_argument);
  }

  TEST_CASE("normal form equals the minimum over the transverse coordinate") {
    for (double kappa : {0.1, 0.25, 0.4, 0.7}) {
      for (double a : {0.0, 0.05, 0.2, 0.35, 0.6, 1.0, 1.4}) {
        double best = INFINITY;
        const int m = 100000;
        for (int i = 0; i <= m; ++i) {
          const double rho = -2.0 + 4.0 * i / m;
          best = std::min(best, normal_form_full(rho, a, kappa));
        }
        CHECK(std::abs(normal_form_2d(a, kappa).value - best) < 1e-6);
      }
    }
  }

  TEST_CASE("normal form branches, parity and the origin") {
    CHECK(normal_form_2d(1.0, 0.3).value == doctest::Approx(-0.5));
    CHECK(normal_form_2d(1.0, 0.3).branch == Branch::outer);
    CHECK(normal_form_2d(0.1, 0.3).branch == Branch::inner);
    CHECK(normal_form_threshold(0.6) == 0.0);
    for (double kappa : {0.1, 0.3, 0.45, 0.6})
      for (double a : {0.01, 0.2, 0.5, 0.9}) {
        CHECK(std::abs(normal_form_2d(a, kappa).value - normal_form_2d(-a, kappa).value) < 1e-12);
      }
    // Above kappa = 1/2 the origin is a local maximum of the reduced energy.
    const double kappa = 0.5 + 1e-3, h = 1e-3;
    const double second = normal_form_2d(h, kappa).value - 2 * normal_form_2d(0.0, kappa).value +
                          normal_form_2d(-h, kappa).value;
    CHECK(second < 0.0);
    CHECK_THROWS_AS(normal_form_2d(NAN, 0.3), std::invalid_argument);
  }

  TEST_CASE("four-atom reduced energy is a transverse minimum of the model energy") {
    const double s2 = std::numbers::sqrt2;
    for (double gamma : {1.0 / 32, 1.0 / 16, 0.1}) {
      const auto p = ModelParams::chain(4, gamma, 0.0, 0.01);
      for (double a : {0.0, 0.05, 0.1, 0.2}) {
        double best = INFINITY;
        for (int i = 0; i <= 40000; ++i) {
          const double rho = -2.0 + 4.0 * i / 40000.0;
          State x{a + rho, a * (-1 - s2), a * (1 + s2), -a + rho};
          best = std::min(best, energy(p, x));
        }
        CHECK(std::abs(normal_form_4(a, gamma) - best) < 1e-7);
        CHECK(std::abs(normal_form_4(a, gamma) - normal_form_4(-a, gamma)) < 1e-12);
      }
    }
  }
}
