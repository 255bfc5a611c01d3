#include "isingrad/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "isingrad/csv.hpp"
#include "isingrad/errors.hpp"

namespace isingrad {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

}  // namespace

void CavityParams::validate() const {
  if (n_photons < 0) throw ArgumentError("photon number must be >= 0");
  if (!(g > 0.0) || !std::isfinite(g)) throw ArgumentError("cavity coupling g must be > 0");
  if (!(j_prime >= 0.0) || !std::isfinite(j_prime)) throw ArgumentError("J' must be >= 0");
}

double CavityParams::d() const {
  return std::sqrt(j_prime * j_prime + 2.0 * g * g * (2.0 * n_photons + 3.0));
}

double CavityParams::delta() const {
  if (!(j_prime > 0.0)) throw DomainError("the two-photon Rabi frequency needs J' > 0");
  return g * g * (2.0 * n_photons + 3.0) / (2.0 * j_prime);
}

double CavityParams::strong_j_ratio() const {
  const double num = g * std::sqrt(2.0 * (2.0 * n_photons + 3.0));
  return j_prime > 0.0 ? num / j_prime : std::numeric_limits<double>::infinity();
}

double CavityState::norm() const {
  double s = 0.0;
  for (const auto& a : amp) s += std::norm(a);
  return std::sqrt(s);
}

Eigen::Matrix4d cavity_hamiltonian(const CavityParams& p) {
  p.validate();
  const double base = p.n_photons + 1.0;
  const double a = p.g * std::sqrt(p.n_photons + 1.0);
  const double b = p.g * std::sqrt(p.n_photons + 2.0);
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h.diagonal() << base - p.j_prime, base + p.j_prime, base + p.j_prime, base - p.j_prime;
  h(0, 1) = h(1, 0) = a;
  h(0, 2) = h(2, 0) = a;
  h(1, 3) = h(3, 1) = b;
  h(2, 3) = h(3, 2) = b;
  return h;
}

CavityState exact_state(double t, const CavityParams& p) {
  p.validate();
  const double n = p.n_photons;
  const double jp = p.j_prime;
  const double d = p.d();
  const double g2 = p.g * p.g;
  const cd global = std::exp(-kI * (n + 1.0) * t);
  const cd ej = std::exp(kI * jp * t);
  // e^{iDt}/(D - J') + e^{-iDt}/(D + J'); D - J' is formed as
  // 2g^2(2n+3)/(D + J') to stay accurate when J' dominates.
  const double d_minus = 2.0 * g2 * (2.0 * n + 3.0) / (d + jp);
  const cd bracket = std::exp(kI * d * t) / d_minus + std::exp(-kI * d * t) / (d + jp);

  CavityState s;
  s.t = t;
  s.amp[0] = global * ((n + 2.0) / (2.0 * n + 3.0) * ej + g2 * (n + 1.0) / d * bracket);
  const cd mid = global * (-kI * p.g * std::sqrt(n + 1.0) / d * std::sin(d * t));
  s.amp[1] = mid;
  s.amp[2] = mid;
  s.amp[3] = global * std::sqrt((n + 1.0) * (n + 2.0)) * (g2 / d * bracket - ej / (2.0 * n + 3.0));
  return s;
}

CavityState numeric_oracle(double t, const CavityParams& p) {
  const Eigen::Matrix4d h = cavity_hamiltonian(p);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(h);
  const Eigen::Matrix4d& v = solver.eigenvectors();
  const Eigen::Vector4d& e = solver.eigenvalues();
  Eigen::Vector4cd coeff;
  for (int k = 0; k < 4; ++k) coeff[k] = v(0, k) * std::exp(-kI * e[k] * t);
  const Eigen::Vector4cd psi = v.cast<cd>() * coeff;
  CavityState s;
  s.t = t;
  for (int k = 0; k < 4; ++k) s.amp[static_cast<std::size_t>(k)] = psi[k];
  return s;
}

StrongJState strong_j_state(double t, const CavityParams& p) {
  p.validate();
  const double n = p.n_photons;
  const double delta = p.delta();
  StrongJState out;
  out.validity_ratio = p.strong_j_ratio();
  out.warning = out.validity_ratio > 0.3;
  const cd global = std::exp(-kI * (n + 1.0 - p.j_prime - delta) * t);
  const double denom = 2.0 * n + 3.0;
  out.state.t = t;
  out.state.amp[0] = global * ((n + 1.0) / denom * std::exp(kI * delta * t) +
                               (n + 2.0) / denom * std::exp(-kI * delta * t));
  out.state.amp[3] =
      global * (2.0 * kI * std::sqrt((n + 1.0) * (n + 2.0)) / denom * std::sin(delta * t));
  return out;
}

double two_photon_max(int n_photons) {
  if (n_photons < 0) throw ArgumentError("photon number must be >= 0");
  const double n = n_photons;
  return 4.0 * (n + 1.0) * (n + 2.0) / ((2.0 * n + 3.0) * (2.0 * n + 3.0));
}

TwoPhotonPrefactor two_photon_prefactor(double beta, double omega, cd m1, cd m2) {
  if (!std::isfinite(beta) || !std::isfinite(omega)) {
    throw ArgumentError("beta and omega must be finite");
  }
  const double denom = 1.0 - 0.5 * beta - omega;
  if (std::abs(denom) < 1e-12) {
    throw PoleError("omega = omega0 (1 - beta/2) is the one-photon resonance of the "
                    "intermediate single-excitation states");
  }
  TwoPhotonPrefactor out;
  out.value = std::norm(m1 / denom + m2 / denom);
  out.resonant = std::abs(omega - 1.0) < 1e-12;
  return out;
}

double dominant_frequency(std::span<const double> values, double dt) {
  const std::size_t m = values.size();
  if (m < 16) throw ArgumentError("frequency extraction needs at least 16 samples");
  if (!(dt > 0.0)) throw ArgumentError("sample spacing must be > 0");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / (m - 1.0));
    w[k] = (values[k] - mean) * hann;
  }

  Eigen::FFT<double> fft;
  std::vector<cd> spectrum;
  fft.fwd(spectrum, w);
  std::size_t best = 1;
  for (std::size_t k = 2; k <= m / 2; ++k) {
    if (std::abs(spectrum[k]) > std::abs(spectrum[best])) best = k;
  }

  // |DTFT| of the windowed data at angular frequency omega.
  auto power = [&](double omega) {
    cd acc = 0.0;
    const cd step = std::exp(-kI * omega * dt);
    cd phase = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      acc += w[k] * phase;
      phase *= step;
      if ((k & 1023u) == 1023u) phase = std::exp(-kI * omega * dt * static_cast<double>(k + 1));
    }
    return std::abs(acc);
  };
  const double bin = 2.0 * std::numbers::pi / (dt * static_cast<double>(m));
  double lo = (static_cast<double>(best) - 1.0) * bin;
  double hi = (static_cast<double>(best) + 1.0) * bin;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = power(x1), f2 = power(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = power(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = power(x2);
    }
  }
  return 0.5 * (lo + hi);
}

void write_cavity_csv(std::ostream& out, const std::vector<CavityState>& states) {
  CsvWriter csv(out, {"t", "p_uu", "p_ud_plus_du", "p_dd", "norm_err"});
  for (const auto& s : states) {
    csv.row(s.t, s.p_uu(), s.p_mid(), s.p_dd(), std::abs(s.norm() - 1.0));
  }
}

}  // namespace isingrad
