// Acceptance suite: one line per criterion, PASS or FAIL, at the stated
// tolerances. Exits nonzero when any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "isingrad/cavity.hpp"
#include "isingrad/errors.hpp"
#include "isingrad/geometry.hpp"
#include "isingrad/lindblad.hpp"
#include "isingrad/meanfield.hpp"

using namespace isingrad;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Report {
 public:
  void check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what + (ok ? "" : " [miss]");
  }
  Outcome done() const { return {pass_, detail_}; }

 private:
  bool pass_ = true;
  std::string detail_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_dev(double got, double want) { return std::abs(got / want - 1.0); }

// ---------------------------------------------------------------------------

Outcome two_atom_oracle() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> grid = uniform_grid(0.0, 5.0, 501);
  LindbladOptions opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-16;
  double worst = 0.0;
  std::map<double, std::vector<double>> gammas;
  for (double beta : {0.0, 0.1, 0.2}) {
    const LindbladParams params{ChainSpec(2, beta), {}, 50.0};
    const Trajectory tr = integrate(DensityMatrix::fully_inverted(2), params, grid, opts);
    for (const auto& s : tr.samples) {
      const double ref = two_atom_analytic(beta, s.tau).gamma;
      worst = std::max(worst, std::abs(s.gamma - ref) / ref);
      gammas[beta].push_back(s.gamma);
    }
  }
  const double elapsed = seconds_since(t0);
  r.check(worst <= 1e-6, "max rel err " + fmt(worst, 3));
  r.check(elapsed < 5.0, "runtime " + fmt(elapsed, 3) + " s");
  const auto& g0 = gammas[0.0];
  const bool monotone = std::is_sorted(g0.rbegin(), g0.rend());
  const auto& g2 = gammas[0.2];
  const auto top = std::max_element(g2.begin(), g2.end());
  const bool peaked = top != g2.begin() && top + 1 != g2.end();
  r.check(monotone, "beta=0 monotone");
  r.check(peaked, "beta=0.2 peak at tau=" + fmt(grid[static_cast<std::size_t>(top - g2.begin())], 3));
  return r.done();
}

Outcome dipole_independence() {
  Report r;
  const std::vector<double> grid = uniform_grid(0.0, 5.0, 251);
  LindbladOptions opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-16;
  opts.keep_states = true;
  std::vector<Trajectory> runs;
  for (double omega : {0.0, 5.0, 50.0}) {
    LindbladParams p{ChainSpec(2, 0.2), Eigen::MatrixXd::Zero(2, 2), 50.0};
    p.omega_dd(0, 1) = p.omega_dd(1, 0) = omega;
    runs.push_back(integrate(DensityMatrix::fully_inverted(2), p, grid, opts));
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const auto& a = runs[0].states[s].rho;
      const auto& b = runs[k].states[s].rho;
      for (Eigen::Index i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a(i, i).real() - b(i, i).real()));
      worst = std::max(worst, std::abs(runs[0].samples[s].gamma - runs[k].samples[s].gamma));
    }
  r.check(worst <= 1e-8, "max population/rate change " + fmt(worst, 3) + " over Omega in {0,5,50}");
  return r.done();
}

Outcome conservation() {
  Report r;
  double trace = 0.0, herm = 0.0;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  for (int n = 1; n <= 6; ++n) {
    for (double beta : {0.0, 0.5}) {
      for (bool dipole : {false, true}) {
        LindbladParams p{ChainSpec(n, beta), {}, 50.0};
        if (dipole && n > 1) {
          p.omega_dd = Eigen::MatrixXd::Zero(n, n);
          for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) p.omega_dd(i, j) = p.omega_dd(j, i) = u(gen);
        }
        std::vector<double> phases(static_cast<std::size_t>(n));
        for (auto& ph : phases) ph = u(gen);
        const DensityMatrix rho0 = dipole ? DensityMatrix::tipped_product(n, 0.7, phases)
                                          : DensityMatrix::fully_inverted(n);
        const Trajectory tr = integrate(rho0, p, uniform_grid(0.0, 3.0, 61));
        for (const auto& s : tr.samples) {
          trace = std::max(trace, s.trace_err);
          herm = std::max(herm, s.herm_err);
        }
      }
    }
  }
  r.check(trace <= 1e-10, "trace " + fmt(trace, 3));
  r.check(herm <= 1e-12, "hermiticity " + fmt(herm, 3));

  // Both seeding modes; a run that leaves the Bloch ball and then stalls the
  // integrator counts as a violation.
  double excess[2] = {0.0, 0.0};
  int bad[2] = {0, 0}, total[2] = {0, 0}, diverged = 0;
  for (int n : {3, 10, 40}) {
    for (double beta : {0.0, 0.5, 0.9}) {
      for (int random : {0, 1}) {
        MFParams p{ChainSpec(n, beta)};
        p.random_phases = random == 1;
        p.seed = 5;
        ++total[random];
        try {
          const MFTrajectory tr = integrate_mf(p);
          excess[random] = std::max(excess[random], tr.max_bound_excess);
          if (tr.bound_violations > 0) ++bad[random];
        } catch (const NumericalError&) {
          ++bad[random];
          ++diverged;
        }
      }
    }
  }
  r.check(bad[0] == 0, "mean-field bound, uniform phases: " + std::to_string(bad[0]) + "/" +
                           std::to_string(total[0]) + " runs exceed (max excess " +
                           fmt(excess[0], 3) + ")");
  r.check(bad[1] == 0, "random phases: " + std::to_string(bad[1]) + "/" +
                           std::to_string(total[1]) + " runs exceed (max excess " +
                           fmt(excess[1], 3) + ", " + std::to_string(diverged) + " diverged)");

  double norm = 0.0;
  for (int n : {0, 1, 5, 20})
    for (double jp : {0.0, 0.5, 5.0}) {
      CavityParams c;
      c.n_photons = n;
      c.g = 0.05;
      c.j_prime = jp;
      for (int k = 0; k <= 1000; ++k) norm = std::max(norm, std::abs(exact_state(k * 0.7, c).norm() - 1.0));
    }
  r.check(norm <= 1e-12, "cavity norm " + fmt(norm, 3));
  return r.done();
}

Outcome mf_vs_reduced() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  for (double beta : {0.5, 0.9}) {
    MFParams p{ChainSpec(10, beta)};
    p.theta0 = 1e-3;
    const MFTrajectory tr = integrate_mf(p);
    const Peak full = find_peak(tr.tau, tr.gamma);
    const Peak reduced = collective_pulse(beta, 10, 20.0).peak;
    const double dh = rel_dev(reduced.value, full.value);
    const double dt = rel_dev(reduced.tau, full.tau);
    r.check(dh <= 0.15 && dt <= 0.20, "beta=" + fmt(beta, 2) + " height dev " + fmt(dh, 3) +
                                          " time dev " + fmt(dt, 3));
  }
  const double elapsed = seconds_since(t0);
  r.check(elapsed < 10.0, "runtime " + fmt(elapsed, 3) + " s");
  return r.done();
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" ISINGRAD_CLI "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("isingrad_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome order_parameter_transition() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = scratch() / "sweep.csv";
  const int code = run_cli("sweep --betas 0,0.5,0.9 --n-range 2:128 -o \"" + out.string() + "\"");
  const double elapsed = seconds_since(t0);
  if (code != 0) return {false, "sweep exited with " + std::to_string(code)};
  const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
  std::map<double, double> nc;
  for (const auto& c : meta["results"]["crossings"]) {
    nc[c["beta"].get<double>()] = c["n_c"].is_null() ? NAN : c["n_c"].get<double>();
  }
  r.check(std::isfinite(nc[0.0]), "N_c(0)=" + fmt(nc[0.0]));
  for (double beta : {0.5, 0.9}) {
    const double d = rel_dev(nc[beta], nc[0.0]);
    r.check(std::isfinite(nc[beta]) && d <= 0.20,
            "N_c(" + fmt(beta, 2) + ")=" + fmt(nc[beta]) + " dev " + fmt(d, 3));
  }
  r.check(elapsed < 300.0, "runtime " + fmt(elapsed, 3) + " s");
  return r.done();
}

Outcome superradiance_gain() {
  Report r;
  auto peak = [](double beta) {
    MFParams p{ChainSpec(100, beta)};
    p.theta0 = 1e-3;
    const MFTrajectory tr = integrate_mf(p);
    return find_peak(tr.tau, tr.gamma).value;
  };
  const double base = peak(0.0);
  for (double beta : {0.3, 0.5}) {
    const double ratio = peak(beta) / base;
    const double gain = 1.0 + 1.5 * beta * beta;
    const double d = rel_dev(ratio, gain);
    r.check(d <= 0.10, "beta=" + fmt(beta, 2) + " ratio " + fmt(ratio) + " vs " + fmt(gain) +
                           " dev " + fmt(d, 3));
  }
  return r.done();
}

Outcome long_range_scaling() {
  Report r;
  const std::vector<double> ns{20, 40, 80, 160};
  for (bool coherent : {false, true}) {
    std::vector<double> peaks;
    bool all_valid = true;
    for (double n : ns) {
      const PulseResult res = longrange_rate(0.3, static_cast<int>(n), coherent);
      all_valid = all_valid && res.valid;
      peaks.push_back(res.gamma_max);
    }
    const ScalingFit fit = fit_power_law(ns, peaks);
    const double target = coherent ? 3.0 : 2.0;
    r.check(std::abs(fit.exponent - target) <= 0.15,
            std::string(coherent ? "coherent" : "incoherent") + " exponent " + fmt(fit.exponent) +
                " vs " + fmt(target, 2) + (all_valid ? "" : " (polynomial not positive)"));
  }
  return r.done();
}

Outcome cavity_checks() {
  Report r;
  double worst = 0.0;
  for (int n : {0, 1, 5})
    for (double g : {0.01, 0.1})
      for (double jp : {0.0, 0.5, 5.0}) {
        CavityParams p;
        p.n_photons = n;
        p.g = g;
        p.j_prime = jp;
        for (int k = 0; k <= 200; ++k) {
          const CavityState a = exact_state(0.5 * k, p), b = numeric_oracle(0.5 * k, p);
          for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(a.amp[i] - b.amp[i]));
        }
      }
  r.check(worst <= 1e-10, "closed form vs eigendecomposition " + fmt(worst, 3));

  CavityParams p;
  p.n_photons = 1;
  p.g = 0.01;
  p.j_prime = 50.0 * p.g * std::sqrt(2.0 * p.n_photons + 3.0);
  const double delta = p.delta();
  const double dt = 0.25 * std::numbers::pi / delta / 64.0;
  std::vector<double> dd;
  for (int k = 0; k < 8192; ++k) dd.push_back(exact_state(k * dt, p).p_dd());
  const double rabi = 0.5 * dominant_frequency(dd, dt);
  const double d = rel_dev(rabi, delta);
  r.check(d <= 0.02, "Rabi " + fmt(rabi, 6) + " vs Delta " + fmt(delta, 6) + " dev " + fmt(d, 3));

  const double period = std::numbers::pi / delta;
  double peak = 0.0;
  for (int k = 0; k <= 200000; ++k) peak = std::max(peak, strong_j_state(period * k / 200000.0, p).state.p_dd());
  const double dp = std::abs(peak - two_photon_max(p.n_photons));
  r.check(dp <= 1e-6, "max two-photon probability off by " + fmt(dp, 3));
  return r.done();
}

SiCi quadrature_si_ci(double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto sinc = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
  auto cosm1 = [](double t) {
    if (t == 0.0) return 0.0;
    const double h = std::sin(0.5 * t);
    return -2.0 * h * h / t;
  };
  const double si = gauss_kronrod<double, 61>::integrate(sinc, 0.0, x, 8, 1e-14);
  const double ci = gauss_kronrod<double, 61>::integrate(cosm1, 0.0, x, 8, 1e-14);
  return {si - 0.5 * std::numbers::pi, std::numbers::egamma + std::log(x) + ci};
}

Outcome geometry_checks() {
  Report r;
  double fdev = 0.0;
  for (double c : {0.0, 0.3, 0.7, 1.0}) {
    const long double x = 1e-4L, c2 = c * c;
    const long double direct =
        1.5L * ((1 - c2) * std::sin(x) / x +
                (1 - 3 * c2) * (std::cos(x) / (x * x) - std::sin(x) / (x * x * x)));
    fdev = std::max(fdev, std::abs(f_coeff(1e-4, c) - static_cast<double>(direct)));
    fdev = std::max(fdev, std::abs(f_coeff(0.0, c) - 1.0));
    fdev = std::max(fdev, std::abs(f_coeff(std::nextafter(kFCoeffSeriesBelow, 0.0), c) -
                                   f_coeff(kFCoeffSeriesBelow, c)));
  }
  r.check(fdev <= 1e-10, "F series/direct " + fmt(fdev, 3));

  const double magic = omega_dd(0.37, 1.0 / std::sqrt(3.0));
  const double magic2 = omega_dd(2.0, std::sqrt(1.0 / 3.0));
  r.check(magic == 0.0 && magic2 == 0.0, "magic-angle Omega " + fmt(magic, 3));

  double pv = 0.0;
  for (double c : {0.0, 0.5, 1.0}) {
    const PvIntegrals v = pv_integrals(1e-3, c);
    const double qs = pv_quasi_static(1e-3, c);
    pv = std::max({pv, rel_dev(v.plus, qs), rel_dev(v.minus, qs)});
  }
  r.check(pv <= 0.01, "pv vs quasi-static " + fmt(pv, 3));

  double sc = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double x = 1e-3 + (50.0 - 1e-3) * k / 2000.0;
    const SiCi a = si_ci(x), b = quadrature_si_ci(x);
    sc = std::max({sc, std::abs(a.si - b.si), std::abs(a.ci - b.ci)});
  }
  for (int k = 0; k <= 300; ++k) {
    const double x = 1e-3 * std::pow(5e4, k / 300.0);
    const SiCi a = si_ci(x), b = quadrature_si_ci(x);
    sc = std::max({sc, std::abs(a.si - b.si), std::abs(a.ci - b.ci)});
  }
  r.check(sc <= 1e-10, "si/ci vs quadrature " + fmt(sc, 3));
  return r.done();
}

Outcome soliton_checks() {
  Report r;
  const SolitonResult front = soliton_ring(20, 0.99, 0);
  std::map<int, std::pair<double, double>> by_distance;  // min, max
  bool crossed = true;
  for (std::size_t i = 0; i < front.transition_time.size(); ++i) {
    const double t = front.transition_time[i];
    crossed = crossed && std::isfinite(t);
    auto [it, fresh] = by_distance.try_emplace(front.ring_distance[i], t, t);
    if (!fresh) {
      it->second.first = std::min(it->second.first, t);
      it->second.second = std::max(it->second.second, t);
    }
  }
  bool ordered = crossed;
  for (auto it = by_distance.begin(); std::next(it) != by_distance.end(); ++it) {
    ordered = ordered && it->second.second < std::next(it)->second.first;
  }
  r.check(ordered, "beta=0.99 transition times strictly increase with ring distance (last " +
                       fmt(by_distance.rbegin()->second.first) + ")");

  const SolitonResult control = soliton_ring(20, 0.0, 0);
  double spread = 0.0;
  for (std::size_t i = 2; i < control.transition_time.size(); ++i) {
    spread = std::max(spread, std::abs(control.transition_time[i] - control.transition_time[1]));
  }
  double rate = 0.0;
  for (std::size_t k = 0; k < control.tau.size(); ++k) {
    rate = std::max(rate, std::abs(control.gamma[k] - 38.0 * std::exp(-2.0 * control.tau[k])));
  }
  r.check(spread <= 1e-9 && rate <= 1e-8,
          "beta=0 spread " + fmt(spread, 3) + ", rate dev " + fmt(rate, 3));
  return r.done();
}

Outcome determinism() {
  Report r;
  const std::vector<std::string> runs{
      "meanfield --n 16 --beta 0.4 --random-phases --seed 7 --per-site",
      "sweep --betas 0.2,0 --n-range 2:12:5",
      "lindblad --n 3 --beta 0.2 --omega 4 --horizon 2",
      "soliton --n 12 --beta 0.9 --defect 3 --horizon 10",
      "cavity --n-photons 2 --jprime 0.3",
  };
  int k = 0;
  for (const auto& args : runs) {
    const fs::path a = scratch() / ("det_a" + std::to_string(k) + ".csv");
    const fs::path b = scratch() / ("det_b" + std::to_string(k) + ".csv");
    ++k;
    const int ca = run_cli(args + " -o \"" + a.string() + "\"");
    const int cb = run_cli(args + " -o \"" + b.string() + "\"");
    const std::string sa = slurp(a);
    const bool same = ca == 0 && cb == 0 && !sa.empty() && sa == slurp(b);
    r.check(same, args.substr(0, args.find(' ')) + (same ? " identical" : " differs"));
  }
  return r.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 two-atom oracle equivalence", two_atom_oracle},
      {"2 dipole-dipole independence", dipole_independence},
      {"3 conservation suite", conservation},
      {"4 mean-field vs reduced pulse", mf_vs_reduced},
      {"5 order-parameter transition", order_parameter_transition},
      {"6 superradiance enhancement", superradiance_gain},
      {"7 long-range scaling", long_range_scaling},
      {"8 cavity", cavity_checks},
      {"9 geometry", geometry_checks},
      {"10 soliton ring", soliton_checks},
      {"11 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
