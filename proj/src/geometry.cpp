#include "isingrad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <json.hpp>

#include "isingrad/csv.hpp"
#include "isingrad/errors.hpp"

namespace isingrad {

namespace {

void check_cos(double cos_chi) {
  if (!(std::abs(cos_chi) <= 1.0)) throw ArgumentError("cos_chi must lie in [-1, 1]");
}

// 1 - 3 cos^2 chi. The magic angle has no exact double representation, so
// values within a few ulps of it are treated as the magic angle itself.
double anisotropy(double cos_chi) {
  const double a = 1.0 - 3.0 * cos_chi * cos_chi;
  return std::abs(a) <= 4.0 * std::numeric_limits<double>::epsilon() ? 0.0 : a;
}

// sin(x)/x and cos(x)/x^2 - sin(x)/x^3 by their Taylor series.
void small_x_parts(double x, double& sinc, double& near) {
  const double x2 = x * x;
  sinc = 0.0;
  near = 0.0;
  double p = 1.0;  // x^{2k}
  double fact = 1.0;  // (2k+1)!
  for (int k = 0; k < 12; ++k) {
    if (k > 0) fact *= (2.0 * k) * (2.0 * k + 1.0);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sinc += sign * p / fact;
    // (-1)^{k+1} x^{2k} (2k+2) / (2k+3)!
    const double fact3 = fact * (2.0 * k + 2.0) * (2.0 * k + 3.0);
    near -= sign * p * (2.0 * k + 2.0) / fact3;
    p *= x2;
  }
}

}  // namespace

double f_coeff(double x, double cos_chi) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError("f_coeff needs a finite x >= 0");
  check_cos(cos_chi);
  const double c2 = cos_chi * cos_chi;
  double sinc, near;
  if (x < kFCoeffSeriesBelow) {
    small_x_parts(x, sinc, near);
  } else {
    sinc = std::sin(x) / x;
    near = std::cos(x) / (x * x) - std::sin(x) / (x * x * x);
  }
  return 1.5 * ((1.0 - c2) * sinc + anisotropy(cos_chi) * near);
}

double omega_dd(double k0r, double cos_chi) {
  if (!(k0r > 0.0)) throw DomainError("dipole-dipole coupling needs distinct atoms (k0 r > 0)");
  check_cos(cos_chi);
  return -1.5 * anisotropy(cos_chi) / (k0r * k0r * k0r);
}

PvIntegrals pv_integrals(double x, double cos_chi) {
  if (!(x > 0.0)) throw DomainError("principal-value integrals need x > 0");
  check_cos(cos_chi);
  const double c2 = cos_chi * cos_chi;
  const double far = 1.0 - c2, near = anisotropy(cos_chi);
  const double x2 = x * x, x3 = x2 * x;
  const SiCi v = si_ci(x);
  const double s = std::sin(x), c = std::cos(x);
  const double a = s * v.ci - c * v.si;
  const double b = s * v.si + c * v.ci;

  PvIntegrals out;
  out.plus = 1.5 * ((far / x - near / x3) * a + (near * b - far) / x2);
  out.minus =
      1.5 * std::numbers::pi * (far * c / x - near * (s / x2 + c / x3)) - out.plus;
  return out;
}

double pv_quasi_static(double x, double cos_chi) {
  if (!(x > 0.0)) throw DomainError("quasi-static asymptote needs x > 0");
  check_cos(cos_chi);
  return -0.75 * std::numbers::pi * anisotropy(cos_chi) / (x * x * x);
}

AtomGeometry::AtomGeometry(std::vector<Eigen::Vector3d> positions, Eigen::Vector3d dipole)
    : positions_(std::move(positions)), dipole_(std::move(dipole)) {
  if (positions_.empty()) throw ArgumentError("geometry needs at least one atom");
  if (!dipole_.allFinite() || std::abs(dipole_.norm() - 1.0) > 1e-12) {
    throw ArgumentError("dipole orientation must be a unit vector");
  }
  for (const auto& p : positions_) {
    if (!p.allFinite()) throw ArgumentError("atom positions must be finite");
  }
  for (std::size_t i = 0; i < positions_.size(); ++i)
    for (std::size_t j = i + 1; j < positions_.size(); ++j) {
      if (!((positions_[i] - positions_[j]).norm() > 0.0)) {
        throw DomainError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                          " coincide");
      }
    }
}

AtomGeometry AtomGeometry::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError(std::string("geometry JSON: ") + e.what());
  }
  auto vec3 = [](const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
      throw ArgumentError(std::string("geometry JSON: ") + what + " must be a 3-vector");
    }
    Eigen::Vector3d v;
    for (int k = 0; k < 3; ++k) {
      if (!j[k].is_number()) {
        throw ArgumentError(std::string("geometry JSON: ") + what + " must be numeric");
      }
      v[k] = j[k].get<double>();
    }
    return v;
  };
  if (!doc.is_object() || !doc.contains("positions_k0r") || !doc.contains("dipole")) {
    throw ArgumentError("geometry JSON needs positions_k0r and dipole");
  }
  if (!doc["positions_k0r"].is_array()) {
    throw ArgumentError("geometry JSON: positions_k0r must be an array");
  }
  std::vector<Eigen::Vector3d> positions;
  for (const auto& p : doc["positions_k0r"]) positions.push_back(vec3(p, "position"));
  Eigen::Vector3d d = vec3(doc["dipole"], "dipole");
  const double norm = d.norm();
  if (!(norm > 0.0)) throw ArgumentError("geometry JSON: dipole must be nonzero");
  return AtomGeometry(std::move(positions), d / norm);
}

double AtomGeometry::distance(int i, int j) const {
  return (positions_.at(static_cast<std::size_t>(i)) - positions_.at(static_cast<std::size_t>(j)))
      .norm();
}

double AtomGeometry::cos_chi(int i, int j) const {
  const Eigen::Vector3d r =
      positions_.at(static_cast<std::size_t>(j)) - positions_.at(static_cast<std::size_t>(i));
  const double c = dipole_.dot(r) / r.norm();
  return std::clamp(c, -1.0, 1.0);
}

std::vector<PairCoefficient> pair_coefficients(const AtomGeometry& geometry) {
  std::vector<PairCoefficient> out;
  const int n = geometry.n_atoms();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double x = geometry.distance(i, j);
      const double c = geometry.cos_chi(i, j);
      out.push_back({i, j, x, c, f_coeff(x, c), omega_dd(x, c)});
    }
  return out;
}

Eigen::MatrixXd omega_matrix(const AtomGeometry& geometry) {
  const int n = geometry.n_atoms();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : pair_coefficients(geometry)) {
    m(p.i, p.j) = p.omega;
    m(p.j, p.i) = p.omega;
  }
  return m;
}

void write_coefficients_csv(std::ostream& out, const std::vector<PairCoefficient>& pairs) {
  CsvWriter csv(out, {"i", "j", "k0r", "cos_chi", "F_at_k0r", "omega_over_gamma0"});
  for (const auto& p : pairs) csv.row(p.i, p.j, p.k0r, p.cos_chi, p.f, p.omega);
}

}  // namespace isingrad
