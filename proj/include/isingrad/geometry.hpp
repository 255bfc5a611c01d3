#pragma once

// Dipole-dipole coefficients for atoms at fixed positions. Lengths are
// dimensionless, x = k0 r with k0 = omega0 / c; every atom carries the same
// unit dipole orientation, and cos_chi is the cosine between the dipole and
// the separation vector.

#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace isingrad {

/// si(x) = Si(x) - pi/2 and the cosine integral ci(x) = Ci(x), both vanishing at infinity.
struct SiCi {
  double si;
  double ci;
};
SiCi si_ci(double x);

/// A(x) = sin(x) ci(x) - cos(x) si(x)
double aux_a(double x);
/// B(x) = sin(x) si(x) + cos(x) ci(x)
double aux_b(double x);

/// Retarded geometric factor; equals 1 at x = 0.
double f_coeff(double x, double cos_chi);
/// Below this separation f_coeff switches to its Taylor series.
inline constexpr double kFCoeffSeriesBelow = 0.05;

/// Quasi-static coupling Omega / gamma0 = -(3/2)(1 - 3 cos^2 chi) / x^3.
double omega_dd(double k0r, double cos_chi);

/// Principal-value frequency integrals of omega^3 F(omega) / (omega +- omega0 Gamma),
/// in units of (omega0 Gamma)^3, at x = k0 Gamma r.
struct PvIntegrals {
  double plus;   // denominator omega + omega0 Gamma
  double minus;  // denominator omega - omega0 Gamma
};
PvIntegrals pv_integrals(double x, double cos_chi);

/// Common small-x limit of both integrals: -(3 pi / 4)(1 - 3 cos^2 chi) / x^3.
double pv_quasi_static(double x, double cos_chi);

class AtomGeometry {
 public:
  /// Throws DomainError for coincident atoms and ArgumentError for a dipole
  /// that is not normalized to 1e-12.
  AtomGeometry(std::vector<Eigen::Vector3d> positions, Eigen::Vector3d dipole);

  /// `{"positions_k0r": [[x,y,z], ...], "dipole": [dx,dy,dz]}`; the dipole is normalized.
  static AtomGeometry from_json(std::string_view text);

  int n_atoms() const { return static_cast<int>(positions_.size()); }
  const std::vector<Eigen::Vector3d>& positions() const { return positions_; }
  const Eigen::Vector3d& dipole() const { return dipole_; }

  double distance(int i, int j) const;
  double cos_chi(int i, int j) const;

 private:
  std::vector<Eigen::Vector3d> positions_;
  Eigen::Vector3d dipole_;
};

struct PairCoefficient {
  int i;
  int j;
  double k0r;
  double cos_chi;
  double f;
  double omega;
};

/// All pairs i < j in lexicographic order.
std::vector<PairCoefficient> pair_coefficients(const AtomGeometry& geometry);
/// Symmetric Omega_ij / gamma0 with zero diagonal, ready for exact dynamics.
Eigen::MatrixXd omega_matrix(const AtomGeometry& geometry);

/// `i,j,k0r,cos_chi,F_at_k0r,omega_over_gamma0`
void write_coefficients_csv(std::ostream& out, const std::vector<PairCoefficient>& pairs);

}  // namespace isingrad
