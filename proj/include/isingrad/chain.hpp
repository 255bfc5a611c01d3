#pragma once

// Product-basis state space of an Ising-coupled chain of two-level atoms.
//
// Units: energies in hbar*omega0, so the atomic Hamiltonian reads
//   H_A = sum_i S^z_i - beta * sum_bonds S^z_i S^z_j,   beta = J / (hbar omega0).
// Bit i of a basis index set means atom i is excited (spin up, S^z = +1/2).

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace isingrad {

enum class Range { kNearestNeighbor, kAllPairs };
enum class Boundary { kCyclic, kOpen };

/// Largest chain the spectrum enumerator accepts.
inline constexpr int kMaxSpectrumAtoms = 20;
/// Largest chain for which dense 2^N x 2^N operators are built.
inline constexpr int kMaxDenseAtoms = 8;

class ChainSpec {
 public:
  ChainSpec(int n_atoms, double beta, Range range = Range::kNearestNeighbor,
            Boundary boundary = Boundary::kCyclic);

  int n_atoms() const { return n_atoms_; }
  double beta() const { return beta_; }
  Range range() const { return range_; }
  Boundary boundary() const { return boundary_; }

  /// Unordered interacting pairs (i < j). A two-atom cyclic chain has one bond.
  const std::vector<std::pair<int, int>>& bonds() const { return bonds_; }
  /// Distinct sites whose S^z enters Gamma_i.
  const std::vector<int>& neighbors(int site) const;

 private:
  int n_atoms_;
  double beta_;
  Range range_;
  Boundary boundary_;
  std::vector<std::pair<int, int>> bonds_;
  std::vector<std::vector<int>> neighbors_;
};

/// Occupation bitmask of fixed width.
class BasisState {
 public:
  BasisState(std::uint32_t bits, int n_atoms);

  static BasisState all_up(int n_atoms);
  static BasisState all_down(int n_atoms) { return BasisState(0u, n_atoms); }

  std::uint32_t bits() const { return bits_; }
  int n_atoms() const { return n_atoms_; }
  bool excited(int site) const { return (bits_ >> site) & 1u; }
  /// S^z eigenvalue of one site: +1/2 or -1/2.
  double sz(int site) const { return excited(site) ? 0.5 : -0.5; }
  int excitations() const;
  /// '1'/'0' per site, site 0 first.
  std::string to_string() const;

 private:
  std::uint32_t bits_;
  int n_atoms_;
};

struct SpectrumLevel {
  double energy;
  int degeneracy;
  BasisState representative;
};

double energy_of(const BasisState& state, const ChainSpec& spec);

/// Energy levels, ascending, grouped with an absolute tolerance of 1e-12.
std::vector<SpectrumLevel> spectrum(const ChainSpec& spec);

/// Eigenvalue of Gamma_i = 1 - beta * sum_{j in neighbors(i)} S^z_j.
double gamma_eigenvalue(const BasisState& state, int site, const ChainSpec& spec);

/// Writes `energy,degeneracy,representative_bits`.
void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumLevel>& levels);

using SparseOp = Eigen::SparseMatrix<std::complex<double>>;

/// A 2^N x 2^N operator. Every operator of the model is real in the product
/// basis; diagonal ones also keep their diagonal for cheap elementwise use.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  static OperatorMatrix diagonal(Eigen::VectorXd diag);
  static OperatorMatrix sparse(SparseOp op);

  bool is_diagonal() const { return is_diagonal_; }
  /// Only meaningful when is_diagonal().
  const Eigen::VectorXd& diag() const { return diag_; }
  const SparseOp& matrix() const { return matrix_; }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  bool is_diagonal_ = false;
  Eigen::VectorXd diag_;
  SparseOp matrix_;
};

struct OperatorSet {
  int n_atoms = 0;
  std::vector<OperatorMatrix> sz;
  std::vector<OperatorMatrix> splus;
  std::vector<OperatorMatrix> sminus;
  std::vector<OperatorMatrix> gamma;
  std::vector<OperatorMatrix> gamma_cubed;
  OperatorMatrix hamiltonian;
};

OperatorSet build_operators(const ChainSpec& spec);

}  // namespace isingrad
