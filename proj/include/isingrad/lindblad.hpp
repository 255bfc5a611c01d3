#pragma once

// Exact reduced-density-matrix dynamics of an Ising-coupled chain radiating
// into the vacuum field, in dimensionless time tau = gamma0 * t:
//
//   d rho/d tau = -i alpha [H_A, rho] + i sum_{i!=j} (Omega_ij/gamma0) [S+_i S-_j, rho]
//                 + sum_{i,j} ([S-_j, rho G_i S+_i] + [S-_i G_i rho, S+_j]),
//
// with G_i = Gamma_i^3 the cubed frequency-renormalization operator and
// alpha = omega0 / gamma0. Only the damping terms feel the Ising coupling.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "isingrad/chain.hpp"
#include "isingrad/ode.hpp"

namespace isingrad {

struct DensityMatrix {
  Eigen::MatrixXcd rho;
  double tau = 0.0;

  int n_atoms() const;
  double trace_error() const;
  /// max_ab |rho_ab - conj(rho_ba)|
  double hermiticity_error() const;
  double min_eigenvalue() const;

  static DensityMatrix basis_state(const BasisState& state);
  static DensityMatrix fully_inverted(int n_atoms);
  /// Product of single-atom states cos(theta/2)|up> + sin(theta/2) e^{i phi_n}|down>,
  /// so <S^z_n> = cos(theta)/2 and <S^+_n> = sin(theta) e^{i phi_n} / 2.
  static DensityMatrix tipped_product(int n_atoms, double theta,
                                      std::span<const double> phases = {});
};

struct LindbladParams {
  ChainSpec spec;
  /// Omega_ij / gamma0, symmetric with zero diagonal. Empty means no dipole coupling.
  Eigen::MatrixXd omega_dd;
  double alpha = 50.0;
};

struct RateSplit {
  double coherent = 0.0;
  double incoherent = 0.0;
  double total() const { return coherent + incoherent; }
};

/// Precomputed operators for repeated right-hand-side evaluation.
class LindbladModel {
 public:
  explicit LindbladModel(const LindbladParams& params);

  const LindbladParams& params() const { return params_; }
  Eigen::Index dim() const { return dim_; }

  /// Time derivative for a Hermitian rho. Assembled as Z + Z^dagger so the
  /// result is Hermitian to the last bit.
  Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho) const;

  /// gamma = sum_{n,i} <G_i S+_i S-_n + S+_n S-_i G_i>, in units of gamma0.
  double relaxation_rate(const Eigen::MatrixXcd& rho) const;
  RateSplit rate_split(const Eigen::MatrixXcd& rho) const;
  double sum_sz(const Eigen::MatrixXcd& rho) const;

 private:
  LindbladParams params_;
  Eigen::Index dim_;
  Eigen::VectorXd energy_;       // H_A diagonal
  Eigen::VectorXd sz_total_;     // sum_n S^z_n diagonal
  Eigen::VectorXd incoherent_;   // sum_n (1 + 2 S^z_n) G_n diagonal
  std::vector<Eigen::VectorXd> gamma_cubed_;
  SparseOp lower_;       // L = sum_j S-_j
  SparseOp weighted_;    // M = sum_i S-_i G_i
  SparseOp weighted_adj_;
  SparseOp loss_;        // K = L^dagger M
  SparseOp dipole_;      // X = sum_{i!=j} Omega_ij S+_i S-_j
  bool has_dipole_ = false;
};

Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const LindbladParams& params);
RateSplit rate_split(const DensityMatrix& rho, const LindbladParams& params);

struct LindbladSample {
  double tau;
  double gamma;
  double sum_sz;
  double coh_rate;
  double incoh_rate;
  double min_eig;
  double trace_err;
  double herm_err;
};

struct Trajectory {
  std::vector<LindbladSample> samples;
  std::vector<DensityMatrix> states;  // filled only with keep_states
  OdeStats stats;
};

struct LindbladOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  bool keep_states = false;
  bool monitor_eigenvalues = true;
};

/// Propagates rho0 across tau_grid (which must start at rho0.tau).
Trajectory integrate(const DensityMatrix& rho0, const LindbladParams& params,
                     std::span<const double> tau_grid, const LindbladOptions& opts = {});

std::vector<double> relaxation_rate(const Trajectory& traj);

struct OrderParameter {
  double value = 0.0;
  int excluded_points = 0;
};

/// (1/T) * integral_0^T coherent/incoherent dtau, trapezoid on the samples.
/// Samples whose incoherent rate is below 1e-14 are dropped and counted.
OrderParameter order_parameter_exact(const Trajectory& traj, double horizon);

struct TwoAtomSolution {
  double rho11;  // |up,up> population
  double x0;     // rho22 + rho33
  double rho44;  // |down,down> population
  double gamma;  // relaxation rate, units of gamma0
};

/// Closed-form two-atom solution from a fully inverted start, gamma0 = 1.
TwoAtomSolution two_atom_analytic(double beta, double t);

/// `tau,gamma,sum_sz,coh_rate,incoh_rate,min_eig,trace_err`
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace isingrad
