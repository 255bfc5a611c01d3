#pragma once

// Adaptive Dormand-Prince 5(4) integrator over Eigen dense vectors.
//
// The integrator lands exactly on every requested sample time instead of
// interpolating between steps, so sampled values carry the full order of the
// method.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "isingrad/errors.hpp"

namespace isingrad {

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;  // 0 selects a step from the local derivative
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;  // floor, relative to max(1, |t|)
  long max_steps = 20'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double final_tau = 0.0;
  bool stopped_early = false;
};

namespace detail {

struct AlwaysContinue {
  template <class V>
  bool operator()(double, const V&) const {
    return true;
  }
};

template <class Vector>
double scaled_rms(const Vector& err, const Vector& y0, const Vector& y1,
                  double rel_tol, double abs_tol) {
  const Eigen::Index n = err.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale =
        abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = std::abs(err[i]) / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) across `grid` (strictly increasing).
///
/// `sample(t, y)` fires at every grid point including the first; returning
/// false ends the run early. `on_step(t, y)` fires after every accepted step
/// with the same stop convention. Throws StiffnessError when the step size
/// underflows or the step budget is exhausted.
template <class Vector, class Rhs, class Sample, class Step = detail::AlwaysContinue>
OdeStats integrate_dopri5(Rhs&& rhs, Vector y, std::span<const double> grid,
                          const OdeOptions& opts, Sample&& sample,
                          Step&& on_step = Step{}) {
  OdeStats stats;
  if (grid.empty()) return stats;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ArgumentError("integration grid must be strictly increasing");
    }
  }

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = grid.front();
  stats.final_tau = t;
  if (!sample(t, static_cast<const Vector&>(y))) {
    stats.stopped_early = true;
    return stats;
  }
  if (grid.size() == 1) return stats;

  Vector k1 = rhs(t, y);
  ++stats.rhs_evals;

  double h = opts.initial_step;
  if (h <= 0.0) {
    const double scale0 = detail::scaled_rms(y, y, y, opts.rel_tol, opts.abs_tol);
    const double scale1 = detail::scaled_rms(k1, y, y, opts.rel_tol, opts.abs_tol);
    double h0 = (scale0 < 1e-5 || scale1 < 1e-5) ? 1e-6 : 0.01 * scale0 / scale1;
    const Vector y1 = y + h0 * k1;
    const Vector f1 = rhs(t + h0, y1);
    ++stats.rhs_evals;
    const Vector df = (f1 - k1) / h0;
    const double d2 = detail::scaled_rms(df, y, y, opts.rel_tol, opts.abs_tol);
    const double dmax = std::max(scale1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                     : std::pow(0.01 / dmax, 1.0 / 5.0);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min(h, opts.max_step);

  std::size_t next = 1;
  while (next < grid.size()) {
    const double target = grid[next];
    const double floor = opts.min_step * std::max(1.0, std::abs(t));
    if (h < floor) {
      std::ostringstream msg;
      msg << "step size underflow at tau=" << t << " (h=" << h
          << ", accepted=" << stats.accepted << ", rejected=" << stats.rejected
          << ")";
      throw StiffnessError(msg.str(), t, h, stats.accepted, stats.rejected);
    }
    if (stats.accepted + stats.rejected >= opts.max_steps) {
      std::ostringstream msg;
      msg << "step budget exhausted at tau=" << t << " (h=" << h << ")";
      throw StiffnessError(msg.str(), t, h, stats.accepted, stats.rejected);
    }

    bool lands = false;
    double step = h;
    if (t + step >= target - 1e-13 * std::max(1.0, std::abs(target))) {
      step = target - t;
      lands = true;
    }

    const Vector k2 = rhs(t + c2 * step, y + step * (a21 * k1));
    const Vector k3 = rhs(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
    const Vector k4 =
        rhs(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = rhs(t + c5 * step,
                          y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 =
        rhs(t + step,
            y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vector y_new =
        y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vector k7 = rhs(t + step, y_new);
    stats.rhs_evals += 6;

    const Vector err =
        step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err_norm =
        detail::scaled_rms(err, y, y_new, opts.rel_tol, opts.abs_tol);

    if (!std::isfinite(err_norm)) {
      ++stats.rejected;
      h = 0.25 * step;
      continue;
    }

    const double factor =
        err_norm == 0.0 ? 5.0
                        : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);

    if (err_norm <= 1.0) {
      ++stats.accepted;
      t = lands ? target : t + step;
      y = std::move(y_new);
      k1 = std::move(k7);
      stats.final_tau = t;
      if (!on_step(t, static_cast<const Vector&>(y))) {
        stats.stopped_early = true;
        return stats;
      }
      if (lands) {
        if (!sample(t, static_cast<const Vector&>(y))) {
          stats.stopped_early = true;
          return stats;
        }
        ++next;
        // A clipped landing step says nothing about the achievable step.
        if (step < h) continue;
      }
      h = std::min(step * factor, opts.max_step);
    } else {
      ++stats.rejected;
      h = step * std::max(0.2, factor);
    }
  }
  return stats;
}

/// Uniform grid of `count` points spanning [t0, t1].
inline std::vector<double> uniform_grid(double t0, double t1, std::size_t count) {
  if (count < 2 || !(t1 > t0)) {
    throw ArgumentError("uniform grid needs at least two points and t1 > t0");
  }
  std::vector<double> grid(count);
  const double dt = (t1 - t0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = t0 + dt * static_cast<double>(i);
  grid.back() = t1;
  return grid;
}

}  // namespace isingrad
