// Command-line runner for the chain, master-equation, mean-field, cavity and
// geometry models. Every run writes a CSV and a metadata JSON that echoes the
// resolved configuration; the same JSON is accepted back through --config.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isingrad/cavity.hpp"
#include "isingrad/chain.hpp"
#include "isingrad/csv.hpp"
#include "isingrad/errors.hpp"
#include "isingrad/geometry.hpp"
#include "isingrad/lindblad.hpp"
#include "isingrad/meanfield.hpp"

#ifndef ISINGRAD_VERSION
#define ISINGRAD_VERSION "0.0.0"
#endif

using namespace isingrad;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitArgument = 2;
constexpr int kExitModel = 3;
constexpr int kExitNumerical = 4;

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

// Options of one subcommand. Values come from the command line first, then
// from the --config file, then from the defaults already held in the bound
// variables.
class ParamSet {
 public:
  explicit ParamSet(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& ref, const std::string& help, bool required = false) {
    CLI::Option* opt = app_->add_option(flag_name(key), ref, help);
    if (!required) opt->capture_default_str();
    entries_.push_back({key, opt, required,
                        [&ref, key](const json& j) {
                          try {
                            ref = j.get<T>();
                          } catch (const json::exception&) {
                            throw ArgumentError("config key '" + key + "' has the wrong type");
                          }
                        },
                        [&ref] { return json(ref); }});
    return opt;
  }

  CLI::Option* flag(const std::string& key, bool& ref, const std::string& help) {
    CLI::Option* opt = app_->add_flag(flag_name(key), ref, help);
    entries_.push_back({key, opt, false,
                        [&ref, key](const json& j) {
                          if (!j.is_boolean()) {
                            throw ArgumentError("config key '" + key + "' must be a boolean");
                          }
                          ref = j.get<bool>();
                        },
                        [&ref] { return json(ref); }});
    return opt;
  }

  void resolve(const json& config) {
    for (const auto& [k, v] : config.items()) {
      const bool known = std::any_of(entries_.begin(), entries_.end(),
                                     [&](const Entry& e) { return e.key == k; });
      if (!known) throw ArgumentError("unknown config key '" + k + "'");
    }
    for (auto& e : entries_) {
      const bool given = e.opt->count() > 0;
      if (!given && config.contains(e.key)) e.load(config.at(e.key));
      if (e.required && !given && !config.contains(e.key)) {
        throw ArgumentError("missing required option " + flag_name(e.key));
      }
    }
  }

  json echo() const {
    json out = json::object();
    for (const auto& e : entries_) out[e.key] = e.save();
    return out;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    bool required;
    std::function<void(const json&)> load;
    std::function<json()> save;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_config(const std::string& path, const std::string& subcommand) {
  if (path.empty()) return json::object();
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ArgumentError("config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw ArgumentError("config must be a JSON object");
  if (doc.contains("subcommand") && doc["subcommand"] != subcommand) {
    throw ArgumentError("config was written by the '" + doc["subcommand"].get<std::string>() +
                        "' subcommand");
  }
  if (doc.contains("config")) doc = doc["config"];
  if (!doc.is_object()) throw ArgumentError("config must be a JSON object");
  return doc;
}

Range parse_range(const std::string& s) {
  if (s == "nearest_neighbor") return Range::kNearestNeighbor;
  if (s == "all_pairs") return Range::kAllPairs;
  throw ArgumentError("range must be nearest_neighbor or all_pairs");
}

Boundary parse_boundary(const std::string& s) {
  if (s == "cyclic") return Boundary::kCyclic;
  if (s == "open") return Boundary::kOpen;
  throw ArgumentError("boundary must be cyclic or open");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ArgumentError("empty list");
  return out;
}

std::vector<int> parse_range_spec(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("n-range must look like a:b or a:b:step");
    }
  }
  if (parts.size() < 2 || parts.size() > 3) throw ArgumentError("n-range must look like a:b[:step]");
  const int step = parts.size() == 3 ? parts[2] : 1;
  if (parts[0] < 1 || parts[1] < parts[0] || step < 1) {
    throw ArgumentError("n-range needs 1 <= a <= b and step >= 1");
  }
  std::vector<int> out;
  for (int n = parts[0]; n <= parts[1]; n += step) out.push_back(n);
  return out;
}

// CSV goes to a buffer first so a failed run leaves no partial file behind.
void emit(const std::string& output, const std::string& subcommand, const json& config,
          const std::string& csv, const json& results) {
  json meta;
  meta["tool"] = "isingrad-cli";
  meta["version"] = ISINGRAD_VERSION;
  meta["subcommand"] = subcommand;
  meta["config"] = config;
  meta["results"] = results;
  const std::string meta_text = meta.dump(2) + "\n";
  if (output.empty() || output == "-") {
    std::cout << csv << std::flush;
    std::cerr << meta_text;
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + output + "'");
  out << csv;
  std::ofstream mout(output + ".meta.json", std::ios::binary);
  if (!mout) throw ArgumentError("cannot write '" + output + ".meta.json'");
  mout << meta_text;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ode_stats(const OdeStats& s) {
  return {{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

void check_tolerances(double rel_tol, double abs_tol) {
  if (!(rel_tol >= 1e-14) || !(abs_tol > 0.0)) {
    throw ArgumentError("rel_tol must be >= 1e-14 and abs_tol > 0");
  }
}

int thread_count() {
  if (const char* env = std::getenv("ISINGRAD_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ArgumentError("ISINGRAD_THREADS must be a positive integer");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct Command {
  CLI::App* app;
  std::unique_ptr<ParamSet> params;
  std::string config_path;
  std::string output = "-";
  std::function<void(Command&)> run;

  json resolve() {
    json config = load_config(config_path, app->get_name());
    if (config.contains("output")) {
      if (app->get_option("--output")->count() == 0) output = config["output"].get<std::string>();
      config.erase("output");
    }
    params->resolve(config);
    json echo = params->echo();
    echo["output"] = output;
    return echo;
  }
};

Command& make_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds,
                      const std::string& name, const std::string& help) {
  auto cmd = std::make_unique<Command>();
  cmd->app = root.add_subcommand(name, help);
  cmd->params = std::make_unique<ParamSet>(cmd->app);
  cmd->app->add_option("--config", cmd->config_path, "JSON config (same schema as the metadata echo)");
  cmd->app->add_option("-o,--output", cmd->output, "CSV path, '-' for stdout")
      ->capture_default_str();
  cmds.push_back(std::move(cmd));
  return *cmds.back();
}

// ---------------------------------------------------------------------------

struct SpectrumCfg {
  int n = 0;
  double beta = 0.0;
  std::string range = "nearest_neighbor";
  std::string boundary = "cyclic";
  bool per_state = false;
};

void add_spectrum(Command& c, SpectrumCfg& cfg) {
  auto& p = *c.params;
  p.add("n", cfg.n, "number of atoms", true);
  p.add("beta", cfg.beta, "Ising coupling J / (hbar omega0)", true);
  p.add("range", cfg.range, "nearest_neighbor or all_pairs");
  p.add("boundary", cfg.boundary, "cyclic or open");
  p.flag("per_state", cfg.per_state, "one row per configuration instead of per level");
  c.run = [&cfg](Command& cmd) {
    const json config = cmd.resolve();
    const ChainSpec spec(cfg.n, cfg.beta, parse_range(cfg.range), parse_boundary(cfg.boundary));
    const auto levels = spectrum(spec);
    std::ostringstream out;
    if (cfg.per_state) {
      CsvWriter csv(out, {"energy", "level", "bits"});
      const std::uint32_t dim = 1u << cfg.n;
      std::vector<std::pair<int, std::uint32_t>> rows;
      for (std::uint32_t b = 0; b < dim; ++b) {
        const double e = energy_of(BasisState(b, cfg.n), spec);
        const auto it = std::lower_bound(
            levels.begin(), levels.end(), e - 1e-12,
            [](const SpectrumLevel& l, double v) { return l.energy < v; });
        rows.emplace_back(static_cast<int>(it - levels.begin()), b);
      }
      std::stable_sort(rows.begin(), rows.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [level, b] : rows) {
        csv.row(energy_of(BasisState(b, cfg.n), spec), level, BasisState(b, cfg.n).to_string());
      }
    } else {
      write_spectrum_csv(out, levels);
    }
    json results = {{"levels", levels.size()},
                    {"lowest", levels.front().representative.to_string()},
                    {"highest", levels.back().representative.to_string()}};
    emit(cmd.output, "spectrum", config, out.str(), results);
  };
}

// ---------------------------------------------------------------------------

struct LindbladCfg {
  int n = 0;
  double beta = 0.0;
  double alpha = 50.0;
  double horizon = 5.0;
  double sample_dt = 0.01;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double omega = 0.0;
  std::string geometry;
  std::string initial = "inverted";
  double theta0 = 0.0;
  std::string range = "nearest_neighbor";
  std::string boundary = "cyclic";
};

void add_lindblad(Command& c, LindbladCfg& cfg) {
  auto& p = *c.params;
  p.add("n", cfg.n, "number of atoms (at most 8)", true);
  p.add("beta", cfg.beta, "Ising coupling, must be < 1", true);
  p.add("alpha", cfg.alpha, "hbar omega0 / (hbar gamma0) scale of the coherent term");
  p.add("horizon", cfg.horizon, "final tau = gamma0 t");
  p.add("sample_dt", cfg.sample_dt, "output spacing in tau");
  p.add("rel_tol", cfg.rel_tol, "relative tolerance");
  p.add("abs_tol", cfg.abs_tol, "absolute tolerance");
  p.add("omega", cfg.omega, "uniform dipole-dipole coupling Omega / gamma0 for every pair");
  p.add("geometry", cfg.geometry, "geometry JSON supplying Omega_ij (overrides --omega)");
  p.add("initial", cfg.initial, "inverted or tipped");
  p.add("theta0", cfg.theta0, "tipping angle for --initial tipped (0 = 2/sqrt(N))");
  p.add("range", cfg.range, "nearest_neighbor or all_pairs");
  p.add("boundary", cfg.boundary, "cyclic or open");
  c.run = [&cfg](Command& cmd) {
    json config = cmd.resolve();
    if (cfg.theta0 == 0.0 && cfg.n > 0) cfg.theta0 = default_tipping_angle(cfg.n);
    config["theta0"] = cfg.theta0;
    if (!(cfg.horizon > 0.0) || !(cfg.sample_dt > 0.0)) {
      throw ArgumentError("horizon and sample_dt must be > 0");
    }
    check_tolerances(cfg.rel_tol, cfg.abs_tol);
    LindbladParams params{ChainSpec(cfg.n, cfg.beta, parse_range(cfg.range),
                                    parse_boundary(cfg.boundary)),
                          {}, cfg.alpha};
    if (!cfg.geometry.empty()) {
      const AtomGeometry geo = AtomGeometry::from_json(read_file(cfg.geometry));
      if (geo.n_atoms() != cfg.n) throw ArgumentError("geometry atom count differs from --n");
      params.omega_dd = omega_matrix(geo);
    } else if (cfg.omega != 0.0) {
      params.omega_dd = Eigen::MatrixXd::Constant(cfg.n, cfg.n, cfg.omega);
      params.omega_dd.diagonal().setZero();
    }
    DensityMatrix rho0;
    if (cfg.initial == "inverted") {
      rho0 = DensityMatrix::fully_inverted(cfg.n);
    } else if (cfg.initial == "tipped") {
      rho0 = DensityMatrix::tipped_product(cfg.n, cfg.theta0);
    } else {
      throw ArgumentError("initial must be inverted or tipped");
    }
    const auto count = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.sample_dt)) + 1;
    const std::vector<double> grid = uniform_grid(0.0, cfg.horizon, std::max<std::size_t>(count, 2));
    LindbladOptions opts;
    opts.rel_tol = cfg.rel_tol;
    opts.abs_tol = cfg.abs_tol;
    const Trajectory traj = integrate(rho0, params, grid, opts);

    std::ostringstream out;
    write_trajectory_csv(out, traj);
    double trace = 0.0, herm = 0.0, min_eig = 0.0;
    for (const auto& s : traj.samples) {
      trace = std::max(trace, s.trace_err);
      herm = std::max(herm, s.herm_err);
      min_eig = std::min(min_eig, s.min_eig);
    }
    const OrderParameter c_exact = order_parameter_exact(traj, cfg.horizon);
    json results = {{"max_trace_err", trace},
                    {"max_herm_err", herm},
                    {"min_eigenvalue", min_eig},
                    {"order_parameter", c_exact.value},
                    {"excluded_points", c_exact.excluded_points},
                    {"ode", ode_stats(traj.stats)}};
    emit(cmd.output, "lindblad", config, out.str(), results);
  };
}

// ---------------------------------------------------------------------------

struct MeanfieldCfg {
  int n = 0;
  double beta = 0.0;
  std::string model = "full";
  double theta0 = 0.0;
  bool random_phases = false;
  std::uint64_t seed = 0;
  double horizon = 50.0;
  double stop_fraction = 0.01;
  double sample_dt = 0.0;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  bool per_site = false;
};

void add_mf_options(ParamSet& p, MeanfieldCfg& cfg) {
  p.add("theta0", cfg.theta0, "initial tipping angle (0 = 2/sqrt(N))");
  p.flag("random_phases", cfg.random_phases, "draw initial phases from --seed");
  p.add("seed", cfg.seed, "phase seed");
  p.add("horizon", cfg.horizon, "final tau");
  p.add("stop_fraction", cfg.stop_fraction, "stop once sum sz < -N/2 + fraction N (negative: never)");
  p.add("sample_dt", cfg.sample_dt, "output spacing (0 = model default)");
  p.add("rel_tol", cfg.rel_tol, "relative tolerance");
  p.add("abs_tol", cfg.abs_tol, "absolute tolerance");
  p.add("max_step", cfg.max_step, "largest integrator step");
}

MFParams to_mf_params(const MeanfieldCfg& cfg, int n, double beta) {
  check_tolerances(cfg.rel_tol, cfg.abs_tol);
  MFParams p{ChainSpec(n, beta)};
  p.theta0 = cfg.theta0;
  p.random_phases = cfg.random_phases;
  p.seed = cfg.seed;
  p.horizon = cfg.horizon;
  p.stop_fraction = cfg.stop_fraction;
  p.sample_dt = cfg.sample_dt;
  p.rel_tol = cfg.rel_tol;
  p.abs_tol = cfg.abs_tol;
  p.max_step = cfg.max_step;
  return p;
}

json peak_json(const Peak& p) {
  return {{"value", p.value}, {"tau", p.tau}, {"interior", p.interior}};
}

void add_meanfield(Command& c, MeanfieldCfg& cfg) {
  auto& p = *c.params;
  p.add("n", cfg.n, "number of atoms", true);
  p.add("beta", cfg.beta, "Ising coupling, must be < 1", true);
  p.add("model", cfg.model, "full, collective, coherent, longrange or longrange_coherent");
  add_mf_options(p, cfg);
  p.flag("per_site", cfg.per_site, "add sz_i columns (full model)");
  c.run = [&cfg](Command& cmd) {
    json config = cmd.resolve();
    std::ostringstream out;
    json results;
    if (cfg.model == "full") {
      const MFParams params = to_mf_params(cfg, cfg.n, cfg.beta);
      const MFTrajectory tr = integrate_mf(params);
      config["theta0"] = tr.theta0;
      config["sample_dt"] = params.resolved_sample_dt();
      write_mf_csv(out, tr, cfg.per_site);
      results = {{"theta0", tr.theta0},
                 {"peak", peak_json(find_peak(tr.tau, tr.gamma))},
                 {"order_parameter", order_parameter_mf(tr).value},
                 {"bound_violations", tr.bound_violations},
                 {"max_bound_excess", tr.max_bound_excess},
                 {"stopped_by_rule", tr.stopped_by_rule},
                 {"ode", ode_stats(tr.stats)}};
    } else {
      PulseResult r;
      if (cfg.model == "collective") {
        config["sample_dt"] = cfg.sample_dt > 0 ? cfg.sample_dt : 1e-3;
        r = collective_pulse(cfg.beta, cfg.n, cfg.horizon, config["sample_dt"].get<double>());
      } else if (cfg.model == "coherent") {
        config["sample_dt"] = cfg.sample_dt > 0 ? cfg.sample_dt : 1e-5;
        r = coherent_pulse(cfg.beta, cfg.n, config["sample_dt"].get<double>());
      } else if (cfg.model == "longrange" || cfg.model == "longrange_coherent") {
        r = longrange_rate(cfg.beta, cfg.n, cfg.model == "longrange_coherent", cfg.horizon);
      } else {
        throw ArgumentError("unknown model '" + cfg.model + "'");
      }
      CsvWriter csv(out, {"tau", "s", "gamma"});
      for (std::size_t k = 0; k < r.tau.size(); ++k) csv.row(r.tau[k], r.s[k], r.gamma[k]);
      results = {{"peak", peak_json(r.peak)},
                 {"gamma_max", r.gamma_max},
                 {"tau_cross", r.tau_cross},
                 {"valid", r.valid}};
      if (!r.valid) std::cerr << "warning: long-range polynomial not positive; no trajectory\n";
    }
    emit(cmd.output, "meanfield", config, out.str(), results);
  };
}

// ---------------------------------------------------------------------------

struct SweepCfg {
  MeanfieldCfg mf;
  std::string betas = "0,0.5,0.9";
  std::string n_range = "2:128";
};

struct SweepRow {
  double beta;
  int n;
  double c;
  int excluded;
  Peak peak;
  double theta0;
};

// First N where C~ reaches 1, interpolated linearly between neighbors.
json crossing(const std::vector<SweepRow>& rows, double beta) {
  const SweepRow* prev = nullptr;
  for (const auto& r : rows) {
    if (r.beta != beta) continue;
    if (r.c >= 1.0) {
      if (!prev) return r.n;
      return prev->n + (1.0 - prev->c) * (r.n - prev->n) / (r.c - prev->c);
    }
    prev = &r;
  }
  return nullptr;
}

void add_sweep(Command& c, SweepCfg& cfg) {
  auto& p = *c.params;
  p.add("betas", cfg.betas, "comma-separated coupling values");
  p.add("n_range", cfg.n_range, "atom numbers a:b[:step]");
  add_mf_options(p, cfg.mf);
  c.run = [&cfg](Command& cmd) {
    const json config = cmd.resolve();
    const std::vector<double> betas = parse_list(cfg.betas);
    const std::vector<int> ns = parse_range_spec(cfg.n_range);
    std::vector<SweepRow> rows;
    for (double b : betas)
      for (int n : ns) rows.push_back({b, n, 0.0, 0, {}, 0.0});
    if (std::any_of(betas.begin(), betas.end(), [](double b) { return b >= 1.0; })) {
      throw ModelValidityError("mean-field dynamics requires beta < 1");
    }

    // Largest chains first so the slowest runs do not trail at the end.
    std::vector<std::size_t> order(rows.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].n > rows[b].n; });
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < order.size();) {
        SweepRow& r = rows[order[k]];
        try {
          const MFTrajectory tr = integrate_mf(to_mf_params(cfg.mf, r.n, r.beta));
          const MFOrderParameter op = order_parameter_mf(tr);
          r.c = op.value;
          r.excluded = op.excluded_points;
          r.peak = find_peak(tr.tau, tr.gamma);
          r.theta0 = tr.theta0;
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = order.size();
        }
      }
    };
    const int threads = std::min<int>(thread_count(), static_cast<int>(rows.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
      return a.beta != b.beta ? a.beta < b.beta : a.n < b.n;
    });
    std::ostringstream out;
    CsvWriter csv(out, {"beta", "n", "order_parameter", "peak_gamma", "peak_tau", "theta0",
                        "excluded_points"});
    for (const auto& r : rows) csv.row(r.beta, r.n, r.c, r.peak.value, r.peak.tau, r.theta0, r.excluded);
    json cross = json::array();
    for (double b : betas) cross.push_back({{"beta", b}, {"n_c", crossing(rows, b)}});
    emit(cmd.output, "sweep", config, out.str(), {{"crossings", cross}, {"threads", threads}});
  };
}

// ---------------------------------------------------------------------------

struct SolitonCfg {
  int n = 20;
  double beta = 0.0;
  int defect = 0;
  double horizon = 50.0;
  double sample_dt = 0.01;
};

void add_soliton(Command& c, SolitonCfg& cfg) {
  auto& p = *c.params;
  p.add("n", cfg.n, "ring size");
  p.add("beta", cfg.beta, "Ising coupling, must be < 1", true);
  p.add("defect", cfg.defect, "site starting in the ground state");
  p.add("horizon", cfg.horizon, "final tau");
  p.add("sample_dt", cfg.sample_dt, "output spacing");
  c.run = [&cfg](Command& cmd) {
    const json config = cmd.resolve();
    const SolitonResult r = soliton_ring(cfg.n, cfg.beta, cfg.defect, cfg.horizon, cfg.sample_dt);
    std::ostringstream out;
    write_soliton_csv(out, r);
    json times = json::array();
    for (double t : r.transition_time) times.push_back(finite_or_null(t));
    emit(cmd.output, "soliton", config, out.str(),
         {{"transition_time", times}, {"ring_distance", r.ring_distance}});
  };
}

// ---------------------------------------------------------------------------

struct CavityCfg {
  int n_photons = 0;
  double g = 0.01;
  double jprime = 0.0;
  std::string model = "exact";
  double t_end = 0.0;
  double dt = 0.0;
};

void add_cavity(Command& c, CavityCfg& cfg) {
  auto& p = *c.params;
  p.add("n_photons", cfg.n_photons, "initial photon number", true);
  p.add("g", cfg.g, "atom-field coupling in hbar omega0");
  p.add("jprime", cfg.jprime, "J / (4 hbar omega0)", true);
  p.add("model", cfg.model, "exact, strong or oracle");
  p.add("t_end", cfg.t_end, "final time in 1/omega0 (0 = four slow periods)");
  p.add("dt", cfg.dt, "output spacing (0 = t_end / 4096)");
  c.run = [&cfg](Command& cmd) {
    json config = cmd.resolve();
    CavityParams params;
    params.n_photons = cfg.n_photons;
    params.g = cfg.g;
    params.j_prime = cfg.jprime;
    params.validate();
    if (cfg.t_end == 0.0) {
      const double slow = cfg.jprime > 0.0 ? std::numbers::pi / params.delta()
                                           : 2.0 * std::numbers::pi / params.d();
      cfg.t_end = 4.0 * slow;
    }
    if (cfg.dt == 0.0) cfg.dt = cfg.t_end / 4096.0;
    if (!(cfg.t_end > 0.0) || !(cfg.dt > 0.0)) throw ArgumentError("t_end and dt must be > 0");
    config["t_end"] = cfg.t_end;
    config["dt"] = cfg.dt;

    const auto steps = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.dt + 1e-9));
    std::vector<CavityState> states;
    states.reserve(steps + 1);
    json results = json::object();
    if (cfg.model == "strong") {
      const StrongJState probe = strong_j_state(0.0, params);
      results["validity_ratio"] = probe.validity_ratio;
      results["warning"] = probe.warning;
      if (probe.warning) {
        std::cerr << "warning: g sqrt(2(2n+3)) / J' = " << probe.validity_ratio
                  << " exceeds 0.3; the two-amplitude picture is unreliable\n";
      }
    } else if (cfg.model != "exact" && cfg.model != "oracle") {
      throw ArgumentError("model must be exact, strong or oracle");
    }
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = cfg.dt * static_cast<double>(k);
      if (cfg.model == "exact") {
        states.push_back(exact_state(t, params));
      } else if (cfg.model == "oracle") {
        states.push_back(numeric_oracle(t, params));
      } else {
        states.push_back(strong_j_state(t, params).state);
      }
    }
    std::vector<double> dd;
    double max_dd = 0.0;
    for (const auto& s : states) {
      dd.push_back(s.p_dd());
      max_dd = std::max(max_dd, s.p_dd());
    }
    results["max_p_dd"] = max_dd;
    if (cfg.jprime > 0.0) {
      results["delta"] = params.delta();
      results["two_photon_max"] = two_photon_max(cfg.n_photons);
      if (dd.size() >= 16) results["rabi_from_p_dd"] = 0.5 * dominant_frequency(dd, cfg.dt);
    }
    std::ostringstream out;
    write_cavity_csv(out, states);
    emit(cmd.output, "cavity", config, out.str(), results);
  };
}

// ---------------------------------------------------------------------------

struct GeometryCfg {
  std::string file;
};

void add_geometry(Command& c, GeometryCfg& cfg) {
  c.params->add("file", cfg.file, "geometry JSON with positions_k0r and dipole", true);
  c.run = [&cfg](Command& cmd) {
    const json config = cmd.resolve();
    const AtomGeometry geo = AtomGeometry::from_json(read_file(cfg.file));
    const auto pairs = pair_coefficients(geo);
    std::ostringstream out;
    write_coefficients_csv(out, pairs);
    emit(cmd.output, "geometry", config, out.str(),
         {{"n_atoms", geo.n_atoms()},
          {"dipole", {geo.dipole().x(), geo.dipole().y(), geo.dipole().z()}}});
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ising-coupled two-level atoms: spectra, relaxation and cavity dynamics"};
  app.set_version_flag("--version", ISINGRAD_VERSION);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> cmds;
  SpectrumCfg spectrum_cfg;
  LindbladCfg lindblad_cfg;
  MeanfieldCfg meanfield_cfg;
  SweepCfg sweep_cfg;
  SolitonCfg soliton_cfg;
  CavityCfg cavity_cfg;
  GeometryCfg geometry_cfg;
  add_spectrum(make_command(app, cmds, "spectrum", "energy levels of the chain"), spectrum_cfg);
  add_lindblad(make_command(app, cmds, "lindblad", "exact master-equation relaxation"),
               lindblad_cfg);
  add_meanfield(make_command(app, cmds, "meanfield", "mean-field and reduced pulse models"),
                meanfield_cfg);
  add_sweep(make_command(app, cmds, "sweep", "mean-field order parameter over (beta, N)"),
            sweep_cfg);
  add_soliton(make_command(app, cmds, "soliton", "ring with one ground-state defect"),
              soliton_cfg);
  add_cavity(make_command(app, cmds, "cavity", "two atoms in a single-mode cavity"), cavity_cfg);
  add_geometry(make_command(app, cmds, "geometry", "dipole-dipole pair coefficients"),
               geometry_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgument;
  }

  for (auto& cmd : cmds) {
    if (!cmd->app->parsed()) continue;
    try {
      cmd->run(*cmd);
      return 0;
    } catch (const ArgumentError& e) {
      std::cerr << "error: " << e.what() << "\n" << cmd->app->help();
      return kExitArgument;
    } catch (const ResourceError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitModel;
    } catch (const ModelValidityError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitModel;
    } catch (const DomainError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitModel;
    } catch (const NumericalError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitNumerical;
    }
  }
  return kExitArgument;
}
