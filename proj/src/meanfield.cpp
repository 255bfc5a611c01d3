#include "isingrad/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "isingrad/csv.hpp"
#include "isingrad/errors.hpp"

namespace isingrad {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBoundTol = 1e-6;

int wrap(int i, int n) { return ((i % n) + n) % n; }

void require_mf_chain(const ChainSpec& spec) {
  if (spec.range() != Range::kNearestNeighbor || spec.boundary() != Boundary::kCyclic) {
    throw ArgumentError("mean-field dynamics needs a cyclic nearest-neighbor chain");
  }
  if (spec.beta() >= 1.0) {
    throw ModelValidityError("mean-field dynamics requires beta < 1 (weak Ising coupling)");
  }
}

void require_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw ArgumentError("beta must be finite and >= 0");
  if (beta >= 1.0) throw ModelValidityError("reduced pulse models require beta < 1");
}

Eigen::VectorXd pack(const BlochField& f) {
  const Eigen::Index n = f.sigma_z.size();
  Eigen::VectorXd y(3 * n);
  y.head(n) = f.sigma_z;
  y.segment(n, n) = f.sigma_plus.real();
  y.tail(n) = f.sigma_plus.imag();
  return y;
}

BlochField unpack(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size() / 3;
  BlochField f;
  f.sigma_z = y.head(n);
  f.sigma_plus.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) f.sigma_plus[i] = cd(y[n + i], y[2 * n + i]);
  return f;
}

std::vector<double> grid_to(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw ArgumentError("horizon and sample step must be > 0");
  const auto count = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
  return uniform_grid(0.0, horizon, std::max<std::size_t>(count, 2));
}

}  // namespace

BlochField BlochField::tipped(int n_atoms, double theta, std::span<const double> phases) {
  if (n_atoms < 1) throw ArgumentError("n_atoms must be >= 1");
  if (!phases.empty() && phases.size() != static_cast<std::size_t>(n_atoms)) {
    throw ArgumentError("one phase per atom is required");
  }
  BlochField f;
  f.sigma_z = Eigen::VectorXd::Constant(n_atoms, 0.5 * std::cos(theta));
  f.sigma_plus = Eigen::VectorXcd::Constant(n_atoms, cd(0.5 * std::sin(theta), 0.0));
  if (!phases.empty()) {
    for (int i = 0; i < n_atoms; ++i) {
      f.sigma_plus[i] = std::polar(0.5 * std::sin(theta), phases[static_cast<std::size_t>(i)]);
    }
  }
  return f;
}

std::vector<double> BlochField::random_phases(int n_atoms, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> out(static_cast<std::size_t>(n_atoms));
  // Top 53 bits to a double in [0, 1); independent of the standard library's
  // distribution implementation.
  for (double& p : out) p = kTwoPi * static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return out;
}

double default_tipping_angle(int n_atoms) {
  if (n_atoms < 1) throw ArgumentError("n_atoms must be >= 1");
  return 2.0 / std::sqrt(static_cast<double>(n_atoms));
}

double MFParams::resolved_sample_dt() const {
  const double dt = sample_dt == 0.0 ? std::min(0.01, 0.05 / spec.n_atoms()) : sample_dt;
  if (!(dt > 0.0)) throw ArgumentError("sample_dt must be > 0");
  return dt;
}

double MFParams::resolved_theta0() const {
  const double t = theta0 == 0.0 ? default_tipping_angle(spec.n_atoms()) : theta0;
  if (!(t > 0.0 && t <= 0.5 * std::numbers::pi)) {
    throw ArgumentError("tipping angle must lie in (0, pi/2]");
  }
  return t;
}

SiteCouplings coupling_functions(double sz_m2, double sz_m1, double sz, double sz_p1,
                                 double sz_p2, double beta) {
  const double b2 = beta * beta;
  const double cubic = beta * (3.0 + b2);
  SiteCouplings c;
  c.gamma = 1.0 - beta * (sz_p1 + sz_m1);
  c.gamma_cubed = 1.0 - cubic * (sz_p1 + sz_m1) + 1.5 * b2 * (1.0 + 4.0 * sz_p1 * sz_m1);
  const double kc = beta * (3.0 + 3.0 * beta + b2);
  c.k_next = 1.0 + kc * (0.5 - sz_p2);
  c.k_prev = 1.0 + kc * (0.5 - sz_m2);
  // The beta^2 term carries sz + sz_{n+-2}; it follows from averaging the
  // cubed neighbor operator with (S^z)^2 = 1/4.
  c.e_next = sz - 0.25 * cubic * (1.0 + 4.0 * sz_p2 * sz) + 1.5 * b2 * (sz + sz_p2);
  c.e_prev = sz - 0.25 * cubic * (1.0 + 4.0 * sz_m2 * sz) + 1.5 * b2 * (sz + sz_m2);
  return c;
}

std::vector<SiteCouplings> coupling_functions(const BlochField& field, double beta) {
  const int n = field.n_atoms();
  std::vector<SiteCouplings> out(static_cast<std::size_t>(n));
  if (n == 1) return out;
  const auto& z = field.sigma_z;
  if (n == 2) {
    const double b2 = beta * beta, b3 = b2 * beta;
    for (int i = 0; i < 2; ++i) {
      const double own = z[i], other = z[1 - i];
      SiteCouplings& c = out[static_cast<std::size_t>(i)];
      c.gamma = 1.0 - beta * other;
      c.gamma_cubed = 1.0 - 3.0 * beta * other + 0.75 * b2 - 0.25 * b3 * other;
      c.k_next = c.k_prev = std::pow(1.0 + 0.5 * beta, 3);
      c.e_next = c.e_prev = own - 0.75 * beta + 0.75 * b2 * own - b3 / 16.0;
    }
    return out;
  }
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        coupling_functions(z[wrap(i - 2, n)], z[wrap(i - 1, n)], z[i], z[wrap(i + 1, n)],
                           z[wrap(i + 2, n)], beta);
  }
  return out;
}

cd w_factor(double gamma_i, double gamma_j) {
  const double x = gamma_i - gamma_j;
  if (std::abs(x) < 1e-12) return 1.0;
  // (e^{iy} - 1)/(iy) = sin(y)/y + i (1 - cos y)/y, without cancellation.
  const double y = kTwoPi * x;
  const double h = std::sin(0.5 * y);
  return {std::sin(y) / y, 2.0 * h * h / y};
}

BlochField mf_rhs(const BlochField& field, double beta) {
  if (beta >= 1.0) throw ModelValidityError("mean-field dynamics requires beta < 1");
  const int n = field.n_atoms();
  if (field.sigma_plus.size() != n) throw ArgumentError("inconsistent Bloch field");
  const auto& z = field.sigma_z;
  const auto& p = field.sigma_plus;
  const auto c = coupling_functions(field, beta);

  BlochField d;
  d.sigma_z.resize(n);
  d.sigma_plus.resize(n);
  if (n == 1) {
    d.sigma_z[0] = -(1.0 + 2.0 * z[0]);
    d.sigma_plus[0] = -p[0];
    return d;
  }
  if (n == 2) {
    for (int i = 0; i < 2; ++i) {
      const int o = 1 - i;
      const auto& ci = c[static_cast<std::size_t>(i)];
      const cd w = w_factor(c[static_cast<std::size_t>(o)].gamma, ci.gamma);
      d.sigma_z[i] = -(1.0 + 2.0 * z[i]) * ci.gamma_cubed -
                     2.0 * (p[o] * std::conj(p[i]) * w).real() * ci.k_next;
      d.sigma_plus[i] = -p[i] * ci.gamma_cubed + 2.0 * ci.e_next * p[o] * w;
    }
    return d;
  }

  for (int i = 0; i < n; ++i) {
    const auto& ci = c[static_cast<std::size_t>(i)];
    const int nx = wrap(i + 1, n), pv = wrap(i - 1, n);
    const double g_i = ci.gamma;
    const cd w_next = w_factor(c[static_cast<std::size_t>(nx)].gamma, g_i);
    const cd w_prev = w_factor(c[static_cast<std::size_t>(pv)].gamma, g_i);

    double long_z = 0.0;
    cd long_p = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || j == nx || j == pv) continue;
      const auto& cj = c[static_cast<std::size_t>(j)];
      const cd w_ji = w_factor(cj.gamma, g_i);  // w_{j,i}; w_{i,j} is its conjugate
      long_z += cj.gamma_cubed * 2.0 * (p[i] * std::conj(p[j]) * std::conj(w_ji)).real();
      long_p += cj.gamma_cubed * p[j] * w_ji;
    }

    d.sigma_z[i] = -(1.0 + 2.0 * z[i]) * ci.gamma_cubed -
                   2.0 * (p[nx] * std::conj(p[i]) * w_next).real() * ci.k_next -
                   2.0 * (p[pv] * std::conj(p[i]) * w_prev).real() * ci.k_prev - long_z;
    d.sigma_plus[i] = -p[i] * ci.gamma_cubed + 2.0 * ci.e_next * p[nx] * w_next +
                      2.0 * ci.e_prev * p[pv] * w_prev + 2.0 * z[i] * long_p;
  }
  return d;
}

MFRates mf_rate_split(const BlochField& field, double beta) {
  const auto c = coupling_functions(field, beta);
  const int n = field.n_atoms();
  cd weighted = 0.0, plain = 0.0;
  double self = 0.0;
  MFRates r;
  for (int i = 0; i < n; ++i) {
    const double g3 = c[static_cast<std::size_t>(i)].gamma_cubed;
    const cd p = field.sigma_plus[i];
    weighted += g3 * p;
    plain += p;
    self += g3 * std::norm(p);
    r.incoherent += (1.0 + 2.0 * field.sigma_z[i]) * g3;
  }
  r.coherent = 2.0 * ((weighted * std::conj(plain)).real() - self);
  return r;
}

MFTrajectory integrate_mf(const BlochField& field0, const MFParams& params) {
  require_mf_chain(params.spec);
  const int n = params.spec.n_atoms();
  if (field0.n_atoms() != n || field0.sigma_plus.size() != n) {
    throw ArgumentError("initial field does not match the chain");
  }
  const double beta = params.spec.beta();
  const std::vector<double> grid = grid_to(params.horizon, params.resolved_sample_dt());

  MFTrajectory traj;
  auto rhs = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return pack(mf_rhs(unpack(y), beta));
  };
  const double stop_level = -0.5 * n + params.stop_fraction * n;
  auto sample = [&](double t, const Eigen::VectorXd& y) {
    const BlochField f = unpack(y);
    const BlochField d = mf_rhs(f, beta);
    const MFRates r = mf_rate_split(f, beta);
    traj.tau.push_back(t);
    traj.gamma.push_back(-d.sigma_z.sum());
    traj.sum_sz.push_back(f.sum_sz());
    traj.coherent.push_back(r.coherent);
    traj.incoherent.push_back(r.incoherent);
    traj.sigma_z.push_back(f.sigma_z);
    if (params.stop_fraction >= 0.0 && f.sum_sz() < stop_level) {
      traj.stopped_by_rule = true;
      return false;
    }
    return true;
  };
  auto on_step = [&](double, const Eigen::VectorXd& y) {
    const double excess_z = y.head(n).cwiseAbs().maxCoeff() - 0.5;
    double excess_p = -0.5;
    for (int i = 0; i < n; ++i) {
      excess_p = std::max(excess_p, std::hypot(y[n + i], y[2 * n + i]) - 0.5);
    }
    const double excess = std::max(excess_z, excess_p);
    traj.max_bound_excess = std::max(traj.max_bound_excess, excess);
    if (excess > kBoundTol) ++traj.bound_violations;
    return true;
  };

  OdeOptions ode;
  ode.rel_tol = params.rel_tol;
  ode.abs_tol = params.abs_tol;
  ode.max_step = params.max_step;
  traj.stats = integrate_dopri5(rhs, pack(field0), grid, ode, sample, on_step);
  return traj;
}

MFTrajectory integrate_mf(const MFParams& params) {
  require_mf_chain(params.spec);
  const int n = params.spec.n_atoms();
  const double theta = params.resolved_theta0();
  std::vector<double> phases;
  if (params.random_phases) phases = BlochField::random_phases(n, params.seed);
  MFTrajectory traj = integrate_mf(BlochField::tipped(n, theta, phases), params);
  traj.theta0 = theta;
  return traj;
}

Peak find_peak(std::span<const double> tau, std::span<const double> values) {
  if (tau.size() != values.size() || tau.empty()) {
    throw ArgumentError("peak search needs matching non-empty samples");
  }
  const auto it = std::max_element(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(it - values.begin());
  Peak pk{*it, tau[k], false};
  if (k == 0 || k + 1 == values.size()) return pk;
  pk.interior = true;
  const double x0 = tau[k - 1], x1 = tau[k], x2 = tau[k + 1];
  const double y0 = values[k - 1], y1 = values[k], y2 = values[k + 1];
  const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a < 0.0) {
    const double b = d01 - a * (x0 + x1);
    const double xv = -b / (2.0 * a);
    if (xv > x0 && xv < x2) {
      pk.tau = xv;
      pk.value = y1 + (xv - x1) * (d01 + a * (xv - x0));
      pk.value = std::max(pk.value, y1);
    }
  }
  return pk;
}

MFOrderParameter order_parameter_mf(const MFTrajectory& traj) {
  MFOrderParameter out;
  if (traj.tau.size() < 2) throw ArgumentError("trajectory too short for a time average");
  double integral = 0.0;
  bool have_prev = false;
  double prev_t = 0.0, prev_r = 0.0;
  for (std::size_t k = 0; k < traj.tau.size(); ++k) {
    if (std::abs(traj.incoherent[k]) < 1e-14) {
      ++out.excluded_points;
      continue;
    }
    const double r = traj.coherent[k] / traj.incoherent[k];
    if (have_prev) integral += 0.5 * (r + prev_r) * (traj.tau[k] - prev_t);
    prev_t = traj.tau[k];
    prev_r = r;
    have_prev = true;
  }
  out.horizon = traj.tau.back();
  out.value = integral / out.horizon;
  return out;
}

double collective_gamma_cubed(double s, double beta) {
  const double b2 = beta * beta;
  return 1.0 - 2.0 * beta * (3.0 + b2) * s + 1.5 * b2 * (1.0 + 4.0 * s * s);
}

namespace {

// Integrates dS/dt = -rate(S)/scale on `grid`, recording S and gamma = rate(S).
template <class Rate>
void run_pulse(PulseResult& out, Rate&& rate, double scale, std::span<const double> grid,
               double stop_below, double max_step) {
  using V = Eigen::VectorXd;
  auto rhs = [&](double, const V& y) -> V { return V::Constant(1, -rate(y[0]) / scale); };
  auto sample = [&](double t, const V& y) {
    out.tau.push_back(t);
    out.s.push_back(y[0]);
    out.gamma.push_back(rate(y[0]));
    return y[0] > stop_below;
  };
  OdeOptions ode;
  ode.rel_tol = 1e-12;
  ode.abs_tol = 1e-14;
  ode.max_step = max_step;
  integrate_dopri5(rhs, V(V::Constant(1, 0.5)), grid, ode, sample);
  out.peak = find_peak(out.tau, out.gamma);
  for (std::size_t k = 1; k < out.s.size(); ++k) {
    if (out.s[k - 1] > 0.0 && out.s[k] <= 0.0) {
      const double f = out.s[k - 1] / (out.s[k - 1] - out.s[k]);
      out.tau_cross = out.tau[k - 1] + f * (out.tau[k] - out.tau[k - 1]);
      break;
    }
  }
}

}  // namespace

PulseResult collective_pulse(double beta, int n_atoms, double horizon, double sample_dt) {
  require_beta(beta);
  if (n_atoms < 1) throw ArgumentError("n_atoms must be >= 1");
  const double nd = n_atoms;
  PulseResult out;
  auto rate = [&](double s) { return nd * (1.0 + 2.0 * s) * collective_gamma_cubed(s, beta); };
  run_pulse(out, rate, nd, grid_to(horizon, sample_dt), -1.0, 0.05);
  out.gamma_max = rate(0.0);
  return out;
}

PulseResult coherent_pulse(double beta, int n_atoms, double sample_dt) {
  require_beta(beta);
  if (n_atoms < 1) throw ArgumentError("n_atoms must be >= 1");
  const double nd = n_atoms;
  PulseResult out;
  auto rate = [&](double s) {
    return nd * nd * (1.5 - 2.0 * s * s) * collective_gamma_cubed(s, beta);
  };
  // The whole pulse lasts a few 1/(N (1-beta)^3) at most.
  const double span = 50.0 / (nd * std::pow(1.0 - beta, 3));
  run_pulse(out, rate, nd, grid_to(span, sample_dt * span), -0.5, 0.01 / nd);
  out.gamma_max = rate(0.0);
  return out;
}

double longrange_polynomial(double s, double beta, int n_atoms) {
  const double m = n_atoms - 1.0;
  const double b2 = beta * beta, b3 = b2 * beta;
  return 1.0 + 0.75 * m * b2 - m * (3.0 * beta + 0.5 * m * b3) * s +
         3.0 * b2 * m * (m - 1.0) * s * s - b3 * m * (m - 1.0) * (m - 2.0) * s * s * s;
}

bool longrange_valid(double beta, int n_atoms) {
  constexpr int kPoints = 4000;
  for (int k = 0; k <= kPoints; ++k) {
    const double s = -0.5 + static_cast<double>(k) / kPoints;
    if (!(longrange_polynomial(s, beta, n_atoms) > 0.0)) return false;
  }
  return true;
}

PulseResult longrange_rate(double beta, int n_atoms, bool coherent, double horizon) {
  require_beta(beta);
  if (n_atoms < 1) throw ArgumentError("n_atoms must be >= 1");
  const double nd = n_atoms;
  auto rate = [&](double s) {
    const double p = longrange_polynomial(s, beta, n_atoms);
    return coherent ? nd * nd * (1.5 - 2.0 * s * s) * p : nd * (1.0 + 2.0 * s) * p;
  };
  PulseResult out;
  out.gamma_max = rate(0.0);
  if (!longrange_valid(beta, n_atoms)) {
    out.valid = false;
    return out;
  }
  const double p0 = longrange_polynomial(0.0, beta, n_atoms);
  if (coherent) {
    const double span = 50.0 / nd;
    run_pulse(out, rate, nd, grid_to(span, 1e-5 * span), -0.5, 0.01 / (nd * p0));
  } else {
    run_pulse(out, rate, nd, grid_to(horizon, 1e-3), -1.0, 0.05 / p0);
  }
  return out;
}

ScalingFit fit_power_law(std::span<const double> n_values, std::span<const double> y) {
  if (n_values.size() != y.size()) throw ArgumentError("fit inputs differ in length");
  if (n_values.size() < 4) throw ArgumentError("power-law fit needs at least four points");
  const auto m = static_cast<double>(n_values.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(y[i] > 0.0)) {
      throw DomainError("power-law fit needs positive data");
    }
    const double lx = std::log(n_values[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vx = sxx - sx * sx / m, vy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
  if (vx <= 0.0) throw DomainError("power-law fit needs distinct N values");
  ScalingFit fit;
  fit.exponent = cxy / vx;
  fit.intercept = (sy - fit.exponent * sx) / m;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  fit.n_values.assign(n_values.begin(), n_values.end());
  return fit;
}

SolitonResult soliton_ring(int n_atoms, double beta, int defect_site, double horizon,
                           double sample_dt) {
  if (n_atoms < 3) throw ArgumentError("the soliton ring needs at least three sites");
  if (defect_site < 0 || defect_site >= n_atoms) throw ArgumentError("defect site out of range");
  require_beta(beta);
  const int n = n_atoms;

  auto derivative = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
      const double up = z[wrap(i + 1, n)], dn = z[wrap(i - 1, n)];
      const double g3 =
          1.0 - beta * (3.0 + beta * beta) * (up + dn) + 1.5 * beta * beta * (1.0 + 4.0 * up * dn);
      d[i] = -(1.0 + 2.0 * z[i]) * g3;
    }
    return d;
  };

  SolitonResult out;
  out.transition_time.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  out.transition_time[static_cast<std::size_t>(defect_site)] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = std::abs(i - defect_site);
    out.ring_distance.push_back(std::min(d, n - d));
  }

  Eigen::VectorXd z0 = Eigen::VectorXd::Constant(n, 0.5);
  z0[defect_site] = -0.5;
  auto rhs = [&](double, const Eigen::VectorXd& z) -> Eigen::VectorXd { return derivative(z); };
  auto sample = [&](double t, const Eigen::VectorXd& z) {
    if (!out.sigma_z.empty()) {
      const Eigen::VectorXd& prev = out.sigma_z.back();
      const double t_prev = out.tau.back();
      for (int i = 0; i < n; ++i) {
        auto& tt = out.transition_time[static_cast<std::size_t>(i)];
        if (std::isnan(tt) && prev[i] > 0.0 && z[i] <= 0.0) {
          tt = t_prev + prev[i] / (prev[i] - z[i]) * (t - t_prev);
        }
      }
    }
    out.tau.push_back(t);
    out.gamma.push_back(-derivative(z).sum());
    out.sigma_z.push_back(z);
    return true;
  };
  OdeOptions ode;
  ode.rel_tol = 1e-10;
  ode.abs_tol = 1e-13;
  ode.max_step = 0.05;
  integrate_dopri5(rhs, std::move(z0), grid_to(horizon, sample_dt), ode, sample);
  return out;
}

void write_mf_csv(std::ostream& out, const MFTrajectory& traj, bool per_site) {
  std::vector<std::string> header{"tau", "gamma", "sum_sz"};
  const bool sites = per_site && !traj.sigma_z.empty();
  const Eigen::Index n = sites ? traj.sigma_z.front().size() : 0;
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("sz_" + std::to_string(i));
  CsvWriter csv(out, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < traj.tau.size(); ++k) {
    row.assign({traj.tau[k], traj.gamma[k], traj.sum_sz[k]});
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(traj.sigma_z[k][i]);
    csv.row(row);
  }
}

void write_soliton_csv(std::ostream& out, const SolitonResult& result) {
  const Eigen::Index n = result.sigma_z.empty() ? 0 : result.sigma_z.front().size();
  std::vector<std::string> header{"tau", "gamma", "sum_sz"};
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("sz_" + std::to_string(i));
  CsvWriter csv(out, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < result.tau.size(); ++k) {
    row.assign({result.tau[k], result.gamma[k], result.sigma_z[k].sum()});
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(result.sigma_z[k][i]);
    csv.row(row);
  }
}

}  // namespace isingrad
