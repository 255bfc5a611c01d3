#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "isingrad/errors.hpp"
#include "isingrad/geometry.hpp"

namespace isingrad {

namespace {

constexpr double kEuler = 0.57721566490153286061;
constexpr double kSeriesBelow = 4.0;

SiCi series(double x) {
  // Si = sum (-1)^k x^{2k+1} / ((2k+1)(2k+1)!),
  // Ci = gamma + ln x + sum_{k>=1} (-1)^k x^{2k} / (2k (2k)!).
  double si = 0.0, ci = 0.0;
  double term = x;  // x^{2k+1}/(2k+1)!
  for (int k = 0; k < 60; ++k) {
    const double s = term / (2 * k + 1);
    si += (k % 2 == 0) ? s : -s;
    // x^{2k+2}/(2k+2)! from x^{2k+1}/(2k+1)!
    const double even = term * x / (2 * k + 2);
    const double c = even / (2 * k + 2);
    ci += (k % 2 == 0) ? -c : c;
    term = even * x / (2 * k + 3);
    if (std::abs(s) < 1e-18 * std::abs(si) && std::abs(c) < 1e-18) break;
  }
  return {si - 0.5 * std::numbers::pi, kEuler + std::log(x) + ci};
}

SiCi continued_fraction(double x) {
  // E1(ix) = -ci(x) + i si(x) by the modified Lentz continued fraction.
  using cd = std::complex<double>;
  constexpr double tiny = 1e-300;
  cd b(1.0, x);
  cd c(1.0 / tiny, 0.0);
  cd d = 1.0 / b;
  cd h = d;
  for (int i = 2; i < 1000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const cd delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  h *= cd(std::cos(x), -std::sin(x));
  return {h.imag(), -h.real()};
}

}  // namespace

SiCi si_ci(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("si/ci need a finite x > 0");
  return x < kSeriesBelow ? series(x) : continued_fraction(x);
}

double aux_a(double x) {
  const SiCi v = si_ci(x);
  return std::sin(x) * v.ci - std::cos(x) * v.si;
}

double aux_b(double x) {
  const SiCi v = si_ci(x);
  return std::sin(x) * v.si + std::cos(x) * v.ci;
}

}  // namespace isingrad
