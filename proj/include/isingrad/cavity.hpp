#pragma once

// Two Ising-coupled atoms in a lossless single-mode resonant cavity. The
// excitation-conserving block seen from |up up, n> is spanned by
//   |up up, n>, |up down, n+1>, |down up, n+1>, |down down, n+2>
// (in that order). Energies are in hbar omega0 and time in 1/omega0.

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isingrad {

struct CavityParams {
  int n_photons = 0;
  double g = 0.01;
  double j_prime = 0.0;  // J / (4 hbar)

  void validate() const;
  /// D = sqrt(J'^2 + 2 g^2 (2n + 3))
  double d() const;
  /// Two-photon Rabi frequency g^2 (2n + 3) / (2 J').
  double delta() const;
  /// g sqrt(2 (2n + 3)) / J'; the two-amplitude picture needs this small.
  double strong_j_ratio() const;
};

struct CavityState {
  std::array<std::complex<double>, 4> amp{};
  double t = 0.0;

  double norm() const;
  double p_uu() const { return std::norm(amp[0]); }
  double p_mid() const { return std::norm(amp[1]) + std::norm(amp[2]); }
  double p_dd() const { return std::norm(amp[3]); }
};

/// The 4 x 4 block Hamiltonian.
Eigen::Matrix4d cavity_hamiltonian(const CavityParams& params);

/// Closed-form state from |up up, n> at t = 0.
CavityState exact_state(double t, const CavityParams& params);

/// Same evolution by eigendecomposition of the block Hamiltonian.
CavityState numeric_oracle(double t, const CavityParams& params);

struct StrongJState {
  CavityState state;
  double validity_ratio = 0.0;
  bool warning = false;  // validity_ratio > 0.3
};
/// Two-amplitude approximation for J' much larger than g sqrt(2n + 3).
StrongJState strong_j_state(double t, const CavityParams& params);

/// Peak two-photon probability of the strong-coupling picture, 4(n+1)(n+2)/(2n+3)^2.
double two_photon_max(int n_photons);

struct TwoPhotonPrefactor {
  double value = 0.0;
  bool resonant = false;  // the energy-conservation condition omega = omega0
};
/// |M1/(1 - beta/2 - omega) + M2/(1 - beta/2 - omega)|^2 with omega in units of omega0.
/// Throws PoleError at the one-photon resonance omega = 1 - beta/2.
TwoPhotonPrefactor two_photon_prefactor(double beta, double omega, std::complex<double> m1,
                                        std::complex<double> m2);

/// Angular frequency of the strongest non-constant component of uniformly
/// sampled data: FFT peak, then golden-section refinement of a Hann-windowed
/// discrete-time Fourier transform.
double dominant_frequency(std::span<const double> values, double dt);

/// `t,p_uu,p_ud_plus_du,p_dd,norm_err`
void write_cavity_csv(std::ostream& out, const std::vector<CavityState>& states);

}  // namespace isingrad
