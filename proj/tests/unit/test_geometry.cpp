#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isingrad/errors.hpp"
#include "isingrad/geometry.hpp"

using namespace isingrad;

namespace {

constexpr double kPi = std::numbers::pi;

// si(x) = Si(x) - pi/2 and Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt,
// both integrands smooth on [0, x].
SiCi quadrature_si_ci(double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto sinc = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
  auto cosm1 = [](double t) {
    if (t == 0.0) return 0.0;
    const double h = std::sin(0.5 * t);
    return -2.0 * h * h / t;
  };
  const double si = gauss_kronrod<double, 61>::integrate(sinc, 0.0, x, 8, 1e-14);
  const double ci = gauss_kronrod<double, 61>::integrate(cosm1, 0.0, x, 8, 1e-14);
  return {si - 0.5 * kPi, std::numbers::egamma + std::log(x) + ci};
}

long double direct_f(long double x, long double c) {
  const long double c2 = c * c;
  return 1.5L * ((1 - c2) * std::sin(x) / x +
                 (1 - 3 * c2) * (std::cos(x) / (x * x) - std::sin(x) / (x * x * x)));
}

}  // namespace

TEST_CASE("si and ci against quadrature") {
  double worst = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double x = 1e-3 * std::pow(5e4, k / 400.0);
    const SiCi got = si_ci(x);
    const SiCi ref = quadrature_si_ci(x);
    worst = std::max({worst, std::abs(got.si - ref.si), std::abs(got.ci - ref.ci)});
  }
  CHECK(worst < 1e-10);
  CHECK(si_ci(1.0).ci == doctest::Approx(0.337404).epsilon(1e-6));
  CHECK(si_ci(1e-9).si == doctest::Approx(-0.5 * kPi).epsilon(1e-8));
  CHECK(std::abs(si_ci(50.0).si) < 1.0 / 50.0);
  CHECK(std::abs(si_ci(50.0).ci) < 1.0 / 50.0);
  // Both sides of the series / continued fraction switch.
  CHECK(std::abs(si_ci(4.0 - 1e-12).ci - si_ci(4.0).ci) < 1e-11);
  CHECK_THROWS_AS(si_ci(0.0), DomainError);
  CHECK_THROWS_AS(si_ci(-1.0), DomainError);
}

TEST_CASE("auxiliary functions") {
  CHECK(aux_a(1e-9) == doctest::Approx(0.5 * kPi).epsilon(1e-6));
  CHECK(aux_a(1000.0) * 1000.0 == doctest::Approx(1.0).epsilon(0.01));
  for (double x : {0.3, 2.0, 7.5}) {
    const SiCi v = si_ci(x);
    CHECK(aux_a(x) == doctest::Approx(std::sin(x) * v.ci - std::cos(x) * v.si));
    CHECK(aux_b(x) == doctest::Approx(std::sin(x) * v.si + std::cos(x) * v.ci));
  }
}

TEST_CASE("retarded geometric factor") {
  for (double c : {0.0, 0.4, 1.0}) CHECK(f_coeff(0.0, c) == 1.0);
  for (double c : {0.0, 0.4, 1.0}) CHECK(f_coeff(1e-6, c) == doctest::Approx(1.0).epsilon(1e-10));
  const double magic = 1.0 / std::sqrt(3.0);
  for (double x : {0.01, 0.5, 3.0, 20.0}) {
    CHECK(f_coeff(x, magic) == doctest::Approx(std::sin(x) / x).epsilon(1e-13));
  }
  CHECK(f_coeff(kPi, 0.0) == doctest::Approx(-1.5 / (kPi * kPi)).epsilon(1e-13));
  // Series and direct branches.
  for (double c : {0.0, 0.3, 1.0}) {
    CHECK(std::abs(f_coeff(1e-4, c) - static_cast<double>(direct_f(1e-4L, c))) < 1e-10);
    const double below = std::nextafter(kFCoeffSeriesBelow, 0.0);
    CHECK(std::abs(f_coeff(below, c) - f_coeff(kFCoeffSeriesBelow, c)) < 1e-10);
    CHECK(std::abs(f_coeff(0.02, c) - static_cast<double>(direct_f(0.02L, c))) < 1e-12);
  }
  CHECK_THROWS_AS(f_coeff(-0.1, 0.0), ArgumentError);
  CHECK_THROWS_AS(f_coeff(0.1, 1.5), ArgumentError);
}

TEST_CASE("quasi-static coupling") {
  CHECK(omega_dd(0.1, 0.0) == doctest::Approx(-1500.0).epsilon(1e-13));
  CHECK(omega_dd(0.1, 1.0) == doctest::Approx(3000.0).epsilon(1e-13));
  CHECK(omega_dd(0.1, 1.0 / std::sqrt(3.0)) == 0.0);
  CHECK(omega_dd(2.0, std::sqrt(1.0 / 3.0)) == 0.0);
  for (double r : {0.05, 0.3, 1.7}) {
    for (double s : {2.0, 3.5}) {
      const double ratio = omega_dd(r, 0.2) / omega_dd(s * r, 0.2);
      CHECK(std::abs(ratio / (s * s * s) - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS_AS(omega_dd(0.0, 0.5), DomainError);
}

TEST_CASE("principal-value integrals") {
  for (double c : {0.0, 1.0, 0.3}) {
    const double x = 1e-3;
    const PvIntegrals pv = pv_integrals(x, c);
    const double qs = pv_quasi_static(x, c);
    CHECK(std::abs(pv.plus / qs - 1.0) < 0.01);
    CHECK(std::abs(pv.minus / qs - 1.0) < 0.01);
  }
  CHECK(pv_quasi_static(0.5, 0.0) == doctest::Approx(-0.75 * kPi / 0.125));
  CHECK_THROWS_AS(pv_integrals(0.0, 0.0), DomainError);
}

TEST_CASE("atom geometry") {
  const AtomGeometry geo = AtomGeometry::from_json(
      R"({"positions_k0r": [[0,0,0],[0.1,0,0],[0,0,0.2]], "dipole": [0,0,2]})");
  CHECK(geo.n_atoms() == 3);
  CHECK(geo.dipole().z() == 1.0);
  CHECK(geo.cos_chi(0, 1) == 0.0);
  CHECK(geo.cos_chi(0, 2) == 1.0);
  const auto pairs = pair_coefficients(geo);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].omega == doctest::Approx(-1500.0));
  CHECK(pairs[1].omega == doctest::Approx(3000.0 / 8.0));
  const Eigen::MatrixXd m = omega_matrix(geo);
  CHECK((m - m.transpose()).norm() == 0.0);
  CHECK(m.diagonal().norm() == 0.0);
  CHECK(m(0, 1) == pairs[0].omega);

  std::ostringstream out;
  write_coefficients_csv(out, pairs);
  CHECK(out.str().rfind("i,j,k0r,cos_chi,F_at_k0r,omega_over_gamma0\n0,1,0.1", 0) == 0);

  CHECK_THROWS_AS(AtomGeometry::from_json("{"), ArgumentError);
  CHECK_THROWS_AS(AtomGeometry::from_json(R"({"positions_k0r": [[0,0,0]]})"), ArgumentError);
  CHECK_THROWS_AS(
      AtomGeometry::from_json(R"({"positions_k0r": [[0,0,0],[0,0,0]], "dipole": [1,0,0]})"),
      DomainError);
  CHECK_THROWS_AS(AtomGeometry({Eigen::Vector3d::Zero()}, Eigen::Vector3d(1, 1, 0)),
                  ArgumentError);
}
