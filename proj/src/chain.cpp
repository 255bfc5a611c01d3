#include "isingrad/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <set>

#include "isingrad/csv.hpp"
#include "isingrad/errors.hpp"

namespace isingrad {

ChainSpec::ChainSpec(int n_atoms, double beta, Range range, Boundary boundary)
    : n_atoms_(n_atoms), beta_(beta), range_(range), boundary_(boundary) {
  if (n_atoms < 1) throw ArgumentError("n_atoms must be >= 1");
  if (!std::isfinite(beta) || beta < 0.0) {
    throw ArgumentError("beta must be finite and non-negative");
  }

  std::set<std::pair<int, int>> unique;
  if (range == Range::kAllPairs) {
    for (int i = 0; i < n_atoms; ++i)
      for (int j = i + 1; j < n_atoms; ++j) unique.emplace(i, j);
  } else {
    for (int i = 0; i + 1 < n_atoms; ++i) unique.emplace(i, i + 1);
    if (boundary == Boundary::kCyclic && n_atoms > 2) unique.emplace(0, n_atoms - 1);
  }
  bonds_.assign(unique.begin(), unique.end());

  neighbors_.assign(n_atoms, {});
  for (const auto& [i, j] : bonds_) {
    neighbors_[i].push_back(j);
    neighbors_[j].push_back(i);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

const std::vector<int>& ChainSpec::neighbors(int site) const {
  if (site < 0 || site >= n_atoms_) throw ArgumentError("site index out of range");
  return neighbors_[site];
}

BasisState::BasisState(std::uint32_t bits, int n_atoms) : bits_(bits), n_atoms_(n_atoms) {
  if (n_atoms < 1 || n_atoms > 31) throw ArgumentError("basis width must be in [1, 31]");
  if ((bits >> n_atoms) != 0u) throw ArgumentError("bitmask wider than n_atoms");
}

BasisState BasisState::all_up(int n_atoms) {
  return BasisState((1u << n_atoms) - 1u, n_atoms);
}

int BasisState::excitations() const { return std::popcount(bits_); }

std::string BasisState::to_string() const {
  std::string s(static_cast<std::size_t>(n_atoms_), '0');
  for (int i = 0; i < n_atoms_; ++i) {
    if (excited(i)) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

double energy_of(const BasisState& state, const ChainSpec& spec) {
  if (state.n_atoms() != spec.n_atoms()) {
    throw ArgumentError("basis state width does not match the chain");
  }
  double field = 0.0;
  for (int i = 0; i < spec.n_atoms(); ++i) field += state.sz(i);
  double ising = 0.0;
  for (const auto& [i, j] : spec.bonds()) ising += state.sz(i) * state.sz(j);
  return field - spec.beta() * ising;
}

std::vector<SpectrumLevel> spectrum(const ChainSpec& spec) {
  const int n = spec.n_atoms();
  if (n > kMaxSpectrumAtoms) {
    throw ResourceError("spectrum enumeration is capped at " +
                        std::to_string(kMaxSpectrumAtoms) + " atoms");
  }
  const std::uint32_t dim = 1u << n;
  std::vector<std::pair<double, std::uint32_t>> energies;
  energies.reserve(dim);
  for (std::uint32_t b = 0; b < dim; ++b) {
    energies.emplace_back(energy_of(BasisState(b, n), spec), b);
  }
  std::sort(energies.begin(), energies.end());

  constexpr double kTol = 1e-12;
  std::vector<SpectrumLevel> levels;
  for (const auto& [e, b] : energies) {
    if (!levels.empty() && std::abs(e - levels.back().energy) <= kTol) {
      ++levels.back().degeneracy;
    } else {
      levels.push_back({e, 1, BasisState(b, n)});
    }
  }
  return levels;
}

double gamma_eigenvalue(const BasisState& state, int site, const ChainSpec& spec) {
  if (state.n_atoms() != spec.n_atoms()) {
    throw ArgumentError("basis state width does not match the chain");
  }
  double shift = 0.0;
  for (int j : spec.neighbors(site)) shift += state.sz(j);
  return 1.0 - spec.beta() * shift;
}

void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumLevel>& levels) {
  CsvWriter csv(out, {"energy", "degeneracy", "representative_bits"});
  for (const auto& level : levels) {
    csv.row(level.energy, level.degeneracy, level.representative.to_string());
  }
}

OperatorMatrix OperatorMatrix::diagonal(Eigen::VectorXd diag) {
  OperatorMatrix op;
  op.is_diagonal_ = true;
  const Eigen::Index d = diag.size();
  op.matrix_.resize(d, d);
  op.matrix_.reserve(Eigen::VectorXi::Constant(d, 1));
  for (Eigen::Index i = 0; i < d; ++i) {
    if (diag[i] != 0.0) op.matrix_.insert(i, i) = diag[i];
  }
  op.matrix_.makeCompressed();
  op.diag_ = std::move(diag);
  return op;
}

OperatorMatrix OperatorMatrix::sparse(SparseOp m) {
  OperatorMatrix op;
  m.makeCompressed();
  op.matrix_ = std::move(m);
  return op;
}

OperatorSet build_operators(const ChainSpec& spec) {
  const int n = spec.n_atoms();
  if (n > kMaxDenseAtoms) {
    throw ResourceError("operator matrices are capped at " +
                        std::to_string(kMaxDenseAtoms) + " atoms");
  }
  const std::uint32_t dim = 1u << n;

  OperatorSet ops;
  ops.n_atoms = n;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd sz(dim), gamma(dim), gamma3(dim);
    std::vector<Eigen::Triplet<std::complex<double>>> up;
    for (std::uint32_t b = 0; b < dim; ++b) {
      const BasisState s(b, n);
      sz[b] = s.sz(i);
      gamma[b] = gamma_eigenvalue(s, i, spec);
      gamma3[b] = gamma[b] * gamma[b] * gamma[b];
      // S^+_i |b> = |b with bit i set> when bit i is clear.
      if (!s.excited(i)) up.emplace_back(b | (1u << i), b, 1.0);
    }
    SparseOp splus(dim, dim);
    splus.setFromTriplets(up.begin(), up.end());
    SparseOp sminus = splus.transpose();

    ops.sz.push_back(OperatorMatrix::diagonal(std::move(sz)));
    ops.gamma.push_back(OperatorMatrix::diagonal(std::move(gamma)));
    ops.gamma_cubed.push_back(OperatorMatrix::diagonal(std::move(gamma3)));
    ops.splus.push_back(OperatorMatrix::sparse(std::move(splus)));
    ops.sminus.push_back(OperatorMatrix::sparse(std::move(sminus)));
  }

  Eigen::VectorXd h(dim);
  for (std::uint32_t b = 0; b < dim; ++b) h[b] = energy_of(BasisState(b, n), spec);
  ops.hamiltonian = OperatorMatrix::diagonal(std::move(h));
  return ops;
}

}  // namespace isingrad
