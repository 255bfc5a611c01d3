#pragma once

// Mean-field (Bloch product ansatz) dynamics of a cyclic Ising chain after
// averaging over the fast optical time scale, plus the reduced one-variable
// pulse models and the site-resolved soliton ring.
//
// sigma_z is <S^z_n>, sigma_plus is the slowly varying <S^+_n> envelope; the
// lowering amplitude is its complex conjugate. Time is tau = gamma0 t.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "isingrad/chain.hpp"
#include "isingrad/ode.hpp"

namespace isingrad {

struct BlochField {
  Eigen::VectorXd sigma_z;
  Eigen::VectorXcd sigma_plus;

  int n_atoms() const { return static_cast<int>(sigma_z.size()); }
  double sum_sz() const { return sigma_z.sum(); }

  /// sigma_z = cos(theta)/2, |sigma_plus| = sin(theta)/2 on every site.
  static BlochField tipped(int n_atoms, double theta, std::span<const double> phases = {});
  /// Row of phases drawn uniformly from [0, 2 pi) with a 64-bit Mersenne twister.
  static std::vector<double> random_phases(int n_atoms, std::uint64_t seed);
};

/// Default tipping angle 2 / sqrt(N).
double default_tipping_angle(int n_atoms);

struct MFParams {
  ChainSpec spec;
  double theta0 = 0.0;  // 0 selects default_tipping_angle
  bool random_phases = false;
  std::uint64_t seed = 0;
  double horizon = 50.0;
  /// Stop once sum sigma_z < -N/2 + stop_fraction * N. Negative disables.
  double stop_fraction = 0.01;
  double sample_dt = 0.0;  // 0 selects min(0.01, 0.05 / N)
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.05;

  explicit MFParams(ChainSpec s) : spec(std::move(s)) {}
  double resolved_theta0() const;
  double resolved_sample_dt() const;
};

struct SiteCouplings {
  double gamma = 1.0;        // Gamma_n
  double gamma_cubed = 1.0;  // <Gamma_n^3>
  double k_next = 1.0;       // K_{n+1}
  double k_prev = 1.0;       // K_{n-1}
  double e_next = 0.0;       // E_{n+1}
  double e_prev = 0.0;       // E_{n-1}
};

/// Neighborhood form for N >= 3: arguments are sigma_z at n-2, n-1, n, n+1, n+2.
SiteCouplings coupling_functions(double sz_m2, double sz_m1, double sz, double sz_p1,
                                 double sz_p2, double beta);
/// Per-site couplings for a whole cyclic field, with the single-bond forms at N = 2.
std::vector<SiteCouplings> coupling_functions(const BlochField& field, double beta);

/// (e^{i 2 pi (gi - gj)} - 1) / (i 2 pi (gi - gj)); 1 when |gi - gj| < 1e-12.
std::complex<double> w_factor(double gamma_i, double gamma_j);

/// Time derivative of the averaged mean-field system.
BlochField mf_rhs(const BlochField& field, double beta);

struct MFRates {
  double coherent = 0.0;
  double incoherent = 0.0;
};
/// Coherent sum_{i!=j} (Gamma^3_i s+_i s-_j + c.c.) and incoherent sum (1+2 s^z_i) Gamma^3_i.
MFRates mf_rate_split(const BlochField& field, double beta);

struct MFTrajectory {
  std::vector<double> tau;
  std::vector<double> gamma;  // -d/dtau sum sigma_z
  std::vector<double> sum_sz;
  std::vector<double> coherent;
  std::vector<double> incoherent;
  std::vector<Eigen::VectorXd> sigma_z;  // per sample
  double theta0 = 0.0;
  long bound_violations = 0;  // accepted steps beyond 1/2 + 1e-6
  double max_bound_excess = 0.0;
  bool stopped_by_rule = false;
  OdeStats stats;
};

MFTrajectory integrate_mf(const BlochField& field0, const MFParams& params);
/// Seeds with the tipping angle and phases in params, then integrates.
MFTrajectory integrate_mf(const MFParams& params);

struct Peak {
  double value = 0.0;
  double tau = 0.0;
  bool interior = false;
};
/// Maximum of sampled data refined by a parabola through the three top samples.
Peak find_peak(std::span<const double> tau, std::span<const double> values);

struct MFOrderParameter {
  double value = 0.0;
  double horizon = 0.0;
  int excluded_points = 0;
};
/// Trapezoid time average of coherent / incoherent over the whole trajectory.
MFOrderParameter order_parameter_mf(const MFTrajectory& traj);

struct PulseResult {
  std::vector<double> tau;
  std::vector<double> s;      // collective S~^z
  std::vector<double> gamma;
  Peak peak;
  double gamma_max = 0.0;     // rate where S~^z crosses 0 (coherent and polynomial models)
  double tau_cross = 0.0;     // time of that crossing
  bool valid = true;
};

/// <Gamma^3> as a function of the collective population.
double collective_gamma_cubed(double s, double beta);

/// dS/dt = -(1 + 2S) <Gamma^3>(S), S(0) = 1/2, gamma = -N dS/dt.
PulseResult collective_pulse(double beta, int n_atoms, double horizon, double sample_dt = 1e-3);
/// dS/dt = -N (3/2 - 2 S^2) <Gamma^3>(S), S(0) = 1/2, until S reaches -1/2.
PulseResult coherent_pulse(double beta, int n_atoms, double sample_dt = 1e-5);

/// Cubic population polynomial replacing <Gamma^3> when every pair interacts.
double longrange_polynomial(double s, double beta, int n_atoms);
/// True when the polynomial stays positive on [-1/2, 1/2].
bool longrange_valid(double beta, int n_atoms);
/// Incoherent or coherent long-range pulse. Invalid parameters give an empty
/// trajectory with valid = false; gamma_max is the S~^z = 0 estimate either way.
PulseResult longrange_rate(double beta, int n_atoms, bool coherent, double horizon = 50.0);

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log prefactor
  double r_squared = 0.0;
  std::vector<double> n_values;
};
/// Least squares of log y against log N; needs at least four points.
ScalingFit fit_power_law(std::span<const double> n_values, std::span<const double> y);

struct SolitonResult {
  std::vector<double> tau;
  std::vector<double> gamma;
  std::vector<Eigen::VectorXd> sigma_z;
  std::vector<double> transition_time;  // first crossing of 0, defect = 0, NaN if none
  std::vector<int> ring_distance;
};

/// Ring of independent-phase sites relaxing through their local Gamma^3.
SolitonResult soliton_ring(int n_atoms, double beta, int defect_site, double horizon = 50.0,
                           double sample_dt = 0.01);

/// `tau,gamma,sum_sz` plus `sz_0..sz_{N-1}` when per-site data is present and requested.
void write_mf_csv(std::ostream& out, const MFTrajectory& traj, bool per_site);
void write_soliton_csv(std::ostream& out, const SolitonResult& result);

}  // namespace isingrad
