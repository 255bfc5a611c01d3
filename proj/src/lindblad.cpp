#include "isingrad/lindblad.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "isingrad/csv.hpp"
#include "isingrad/errors.hpp"

namespace isingrad {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

int atoms_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw ArgumentError("density matrix dimension is not 2^N");
  return n;
}

}  // namespace

int DensityMatrix::n_atoms() const { return atoms_for_dim(rho.rows()); }

double DensityMatrix::trace_error() const { return std::abs(rho.trace() - cd(1.0)); }

double DensityMatrix::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix DensityMatrix::basis_state(const BasisState& state) {
  const Eigen::Index dim = Eigen::Index{1} << state.n_atoms();
  DensityMatrix out;
  out.rho = Eigen::MatrixXcd::Zero(dim, dim);
  out.rho(state.bits(), state.bits()) = 1.0;
  return out;
}

DensityMatrix DensityMatrix::fully_inverted(int n_atoms) {
  return basis_state(BasisState::all_up(n_atoms));
}

DensityMatrix DensityMatrix::tipped_product(int n_atoms, double theta,
                                            std::span<const double> phases) {
  if (n_atoms < 1 || n_atoms > kMaxDenseAtoms) {
    throw ResourceError("dense density matrices are capped at " +
                        std::to_string(kMaxDenseAtoms) + " atoms");
  }
  if (!phases.empty() && phases.size() != static_cast<std::size_t>(n_atoms)) {
    throw ArgumentError("one phase per atom is required");
  }
  const Eigen::Index dim = Eigen::Index{1} << n_atoms;
  Eigen::VectorXcd psi(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    cd amp = 1.0;
    for (int i = 0; i < n_atoms; ++i) {
      const double phi = phases.empty() ? 0.0 : phases[static_cast<std::size_t>(i)];
      amp *= ((b >> i) & 1) ? cd(std::cos(0.5 * theta))
                            : std::sin(0.5 * theta) * std::exp(kI * phi);
    }
    psi[b] = amp;
  }
  DensityMatrix out;
  out.rho = psi * psi.adjoint();
  return out;
}

LindbladModel::LindbladModel(const LindbladParams& params) : params_(params) {
  const ChainSpec& spec = params_.spec;
  const int n = spec.n_atoms();
  if (spec.beta() >= 1.0) {
    throw ModelValidityError(
        "the Born-Markov master equation requires beta < 1 (weak Ising coupling)");
  }
  if (n > kMaxDenseAtoms) {
    throw ResourceError("exact propagation is capped at " +
                        std::to_string(kMaxDenseAtoms) + " atoms");
  }
  if (!std::isfinite(params_.alpha)) throw ArgumentError("alpha must be finite");
  if (params_.omega_dd.size() != 0) {
    const auto& om = params_.omega_dd;
    if (om.rows() != n || om.cols() != n) {
      throw ArgumentError("omega_dd must be an N x N matrix");
    }
    if (!om.allFinite()) throw ArgumentError("omega_dd must be finite");
    for (int i = 0; i < n; ++i) {
      if (om(i, i) != 0.0) throw ArgumentError("omega_dd must have a zero diagonal");
      for (int j = 0; j < i; ++j) {
        if (om(i, j) != om(j, i)) throw ArgumentError("omega_dd must be symmetric");
      }
    }
    has_dipole_ = !om.isZero(0.0);
  }

  const OperatorSet ops = build_operators(spec);
  dim_ = Eigen::Index{1} << n;
  energy_ = ops.hamiltonian.diag();
  sz_total_ = Eigen::VectorXd::Zero(dim_);
  incoherent_ = Eigen::VectorXd::Zero(dim_);
  lower_.resize(dim_, dim_);
  weighted_.resize(dim_, dim_);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd& g3 = ops.gamma_cubed[i].diag();
    gamma_cubed_.push_back(g3);
    sz_total_ += ops.sz[i].diag();
    incoherent_ += ((1.0 + 2.0 * ops.sz[i].diag().array()) * g3.array()).matrix();
    lower_ += ops.sminus[i].matrix();
    weighted_ += ops.sminus[i].matrix() * ops.gamma_cubed[i].matrix();
  }
  weighted_adj_ = weighted_.adjoint();
  loss_ = SparseOp(lower_.adjoint()) * weighted_;

  dipole_.resize(dim_, dim_);
  if (has_dipole_) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j || params_.omega_dd(i, j) == 0.0) continue;
        dipole_ += params_.omega_dd(i, j) *
                   SparseOp(ops.splus[i].matrix() * ops.sminus[j].matrix());
      }
  }
  lower_.makeCompressed();
  weighted_.makeCompressed();
  weighted_adj_.makeCompressed();
  loss_.makeCompressed();
  dipole_.makeCompressed();
}

Eigen::MatrixXcd LindbladModel::rhs(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw ArgumentError("density matrix dimension does not match the model");
  }
  // Z collects every term whose adjoint supplies the rest of the generator:
  // -i alpha H rho, i X rho, L rho M^dagger and -L^dagger M rho.
  Eigen::MatrixXcd z = (lower_ * rho) * weighted_adj_;
  z.noalias() -= loss_ * rho;
  z += (cd(0.0, -params_.alpha) * energy_).asDiagonal() * rho;
  if (has_dipole_) z += kI * (dipole_ * rho);
  Eigen::MatrixXcd out = z + z.adjoint();
  return out;
}

double LindbladModel::relaxation_rate(const Eigen::MatrixXcd& rho) const {
  // Tr(rho (K + K^dagger)) = 2 Re Tr(rho K) for Hermitian rho.
  cd tr = 0.0;
  for (Eigen::Index col = 0; col < loss_.outerSize(); ++col) {
    for (SparseOp::InnerIterator it(loss_, col); it; ++it) {
      tr += rho(it.col(), it.row()) * it.value();
    }
  }
  return 2.0 * tr.real();
}

RateSplit LindbladModel::rate_split(const Eigen::MatrixXcd& rho) const {
  RateSplit split;
  split.incoherent = (rho.diagonal().real().array() * incoherent_.array()).sum();

  // Cross terms <G_i S+_i S-_n> for i != n, accumulated basis state by basis
  // state: S-_n clears bit n of b, S+_i sets bit i, G_i acts on the result a.
  const int n = params_.spec.n_atoms();
  cd cross = 0.0;
  for (Eigen::Index b = 0; b < dim_; ++b) {
    for (int site_n = 0; site_n < n; ++site_n) {
      if (!((b >> site_n) & 1)) continue;
      for (int site_i = 0; site_i < n; ++site_i) {
        if (site_i == site_n) continue;
        const Eigen::Index lowered = b & ~(Eigen::Index{1} << site_n);
        if ((lowered >> site_i) & 1) continue;
        const Eigen::Index a = lowered | (Eigen::Index{1} << site_i);
        cross += rho(b, a) * gamma_cubed_[site_i][a];
      }
    }
  }
  split.coherent = 2.0 * cross.real();
  return split;
}

double LindbladModel::sum_sz(const Eigen::MatrixXcd& rho) const {
  return (rho.diagonal().real().array() * sz_total_.array()).sum();
}

Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const LindbladParams& params) {
  return LindbladModel(params).rhs(rho.rho);
}

RateSplit rate_split(const DensityMatrix& rho, const LindbladParams& params) {
  return LindbladModel(params).rate_split(rho.rho);
}

Trajectory integrate(const DensityMatrix& rho0, const LindbladParams& params,
                     std::span<const double> tau_grid, const LindbladOptions& opts) {
  const LindbladModel model(params);
  if (rho0.rho.rows() != model.dim() || rho0.rho.cols() != model.dim()) {
    throw ArgumentError("initial density matrix does not match the chain");
  }
  if (tau_grid.empty()) throw ArgumentError("empty tau grid");
  if (tau_grid.front() != rho0.tau) {
    throw ArgumentError("tau grid must start at the initial state's time stamp");
  }
  if (rho0.hermiticity_error() > 1e-12) throw ArgumentError("initial state is not Hermitian");
  if (rho0.trace_error() > 1e-10) throw ArgumentError("initial state does not have unit trace");

  const Eigen::Index dim = model.dim();
  using Vec = Eigen::VectorXcd;
  Vec y = Eigen::Map<const Vec>(rho0.rho.data(), dim * dim);

  auto rhs = [&](double, const Vec& state) -> Vec {
    const Eigen::Map<const Eigen::MatrixXcd> rho(state.data(), dim, dim);
    const Eigen::MatrixXcd d = model.rhs(rho);
    return Eigen::Map<const Vec>(d.data(), dim * dim);
  };

  Trajectory traj;
  auto sample = [&](double tau, const Vec& state) {
    DensityMatrix dm;
    dm.rho = Eigen::Map<const Eigen::MatrixXcd>(state.data(), dim, dim);
    dm.tau = tau;
    const RateSplit split = model.rate_split(dm.rho);
    LindbladSample s{};
    s.tau = tau;
    s.gamma = model.relaxation_rate(dm.rho);
    s.sum_sz = model.sum_sz(dm.rho);
    s.coh_rate = split.coherent;
    s.incoh_rate = split.incoherent;
    s.min_eig = opts.monitor_eigenvalues ? dm.min_eigenvalue()
                                         : std::numeric_limits<double>::quiet_NaN();
    s.trace_err = dm.trace_error();
    s.herm_err = dm.hermiticity_error();
    traj.samples.push_back(s);
    if (opts.keep_states) traj.states.push_back(std::move(dm));
    return true;
  };

  OdeOptions ode;
  ode.rel_tol = opts.rel_tol;
  ode.abs_tol = opts.abs_tol;
  traj.stats = integrate_dopri5(rhs, std::move(y), tau_grid, ode, sample);
  return traj;
}

std::vector<double> relaxation_rate(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.push_back(s.gamma);
  return out;
}

OrderParameter order_parameter_exact(const Trajectory& traj, double horizon) {
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  if (traj.samples.empty() || traj.samples.back().tau < horizon * (1.0 - 1e-12)) {
    throw ArgumentError("trajectory does not cover the horizon");
  }
  OrderParameter out;
  double integral = 0.0;
  bool have_prev = false;
  double prev_tau = 0.0, prev_ratio = 0.0;
  for (const auto& s : traj.samples) {
    if (s.tau > horizon * (1.0 + 1e-12)) break;
    if (std::abs(s.incoh_rate) < 1e-14) {
      ++out.excluded_points;
      continue;
    }
    const double ratio = s.coh_rate / s.incoh_rate;
    if (have_prev) integral += 0.5 * (ratio + prev_ratio) * (s.tau - prev_tau);
    prev_tau = s.tau;
    prev_ratio = ratio;
    have_prev = true;
  }
  out.value = integral / horizon;
  return out;
}

TwoAtomSolution two_atom_analytic(double beta, double t) {
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("two-atom solution needs beta in [0, 1)");
  if (!(t >= 0.0)) throw DomainError("two-atom solution needs t >= 0");
  const double n = std::pow(1.0 + 0.5 * beta, 3);
  const double m = std::pow(1.0 - 0.5 * beta, 3);
  // (1 - e^{-4(n-m)t}) / (n - m) written through expm1 so beta -> 0 is smooth.
  const double z = 4.0 * (n - m) * t;
  const double phi = z == 0.0 ? 1.0 : -std::expm1(-z) / z;
  const double decay = std::exp(-4.0 * m * t);

  TwoAtomSolution s{};
  s.rho11 = decay;
  s.x0 = m * decay * 4.0 * t * phi;
  s.rho44 = 1.0 - s.rho11 - s.x0;
  s.gamma = 4.0 * m * decay * (1.0 + n * 4.0 * t * phi);
  return s;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  CsvWriter csv(out, {"tau", "gamma", "sum_sz", "coh_rate", "incoh_rate", "min_eig",
                      "trace_err"});
  for (const auto& s : traj.samples) {
    csv.row(s.tau, s.gamma, s.sum_sz, s.coh_rate, s.incoh_rate, s.min_eig, s.trace_err);
  }
}

}  // namespace isingrad
