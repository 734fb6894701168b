#pragma once

// Erosion at a flat point x* downstream of a dune: if u0 and its first two
// derivatives vanish at x*, every local term drops out and
//   u_t(0, x*) = -C_I \int_0^inf u0(x* - s) s^{-7/3} ds,
// which is negative as soon as there is mass upstream of x*.

#include "fowler/errors.hpp"
#include "fowler/grid.hpp"
#include "fowler/nonlocal.hpp"
#include "fowler/quadrature.hpp"
#include "fowler/spectral_solver.hpp"
#include "fowler/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fowler {

inline constexpr double kFlatnessTolerance = 1e-10;

namespace detail {

inline void require_flat(double value, double d1, double d2, double x) {
  const std::pair<const char*, double> checks[] = {{"u0", value}, {"u0'", d1}, {"u0''", d2}};
  for (const auto& [name, v] : checks) {
    if (!(std::abs(v) <= kFlatnessTolerance)) {
      std::ostringstream msg;
      msg << "erosion: x* = " << x << " is not a flat point, " << name << "(x*) = " << v;
      throw std::domain_error(msg.str());
    }
  }
}

}  // namespace detail

/// -(4/9) \int_0^inf u0(x* - s) s^{-7/3} ds.
inline double erosion_rate(const SmoothProfile& u0, double x_star) {
  if (u0.affine_left()) throw std::domain_error("erosion: profile must have compact support");
  const auto at = u0(x_star);
  detail::require_flat(at.value, at.d1, at.d2, x_star);
  const double a = std::max(0.0, x_star - u0.hi());
  const double b = x_star - u0.lo();
  if (b <= a) return 0.0;
  const auto r = quad::adaptive(
      [&](double s) { return s > 0.0 ? u0(x_star - s).value * std::pow(s, -7.0 / 3.0) : 0.0; }, a, b, 1e-12);
  if (!(r.error <= 1e-10 * std::max(1.0, std::abs(r.value)))) {
    throw NumericalError("erosion: quadrature did not converge", r.error);
  }
  return -kCI * r.value;
}

/// Grid version: trapezoid sum over the nodes upstream of node j.
inline double erosion_rate(const Field& u0, std::size_t j) {
  const auto& v = u0.values;
  if (j == 0 || j + 1 >= v.size()) throw std::out_of_range("erosion: probe node must be interior");
  const double dx = u0.grid.dx();
  detail::require_flat(v[j], (v[j + 1] - v[j - 1]) / (2.0 * dx), (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (dx * dx),
                       u0.grid.node(j));
  double acc = 0.0;
  for (std::size_t i = 0; i < j; ++i) acc += v[i] * std::pow(static_cast<double>(j - i) * dx, -7.0 / 3.0);
  return -kCI * acc * dx;
}

struct ErosionReport {
  double x_star = 0.0;          // grid node used as x*
  double predicted_rate = 0.0;  // u_t(0, x*)
  double measured_rate = 0.0;   // slope of the least-squares line through u(t, x*), t in [dt, fit_steps dt]
  std::optional<double> t_star;  // first step time with u(t, x*) < 0
  double min_location = 0.0;    // argmin of the final snapshot
  double min_value = 0.0;
  double support_right = 0.0;   // right edge of the numerical support of u0
  std::vector<std::pair<double, double>> trace;  // (t, u(t, x*)) at every step
  SimReport run;

  double relative_slope_error() const {
    return std::abs(measured_rate - predicted_rate) / std::abs(predicted_rate);
  }
  bool downstream() const { return min_location > support_right; }
};

inline constexpr std::size_t kErosionFitSteps = 100;

namespace detail {

inline double fit_slope(const std::vector<std::pair<double, double>>& pts) {
  double st = 0.0, su = 0.0;
  for (const auto& [t, u] : pts) {
    st += t;
    su += u;
  }
  const double n = static_cast<double>(pts.size());
  const double tm = st / n, um = su / n;
  double num = 0.0, den = 0.0;
  for (const auto& [t, u] : pts) {
    num += (t - tm) * (u - um);
    den += (t - tm) * (t - tm);
  }
  return num / den;
}

inline ErosionReport run_erosion(const Field& u0, std::size_t node, double predicted, const SimConfig& cfg) {
  if (*std::min_element(u0.values.begin(), u0.values.end()) < 0.0) {
    throw std::domain_error("erosion: initial data must be nonnegative");
  }
  SimConfig run_cfg = cfg;
  run_cfg.probes = {node};
  if (run_cfg.steps() < kErosionFitSteps) throw ConfigError("t_end", "must cover at least 100 steps");

  ErosionReport rep;
  rep.x_star = u0.grid.node(node);
  rep.predicted_rate = predicted;
  rep.support_right = numerical_support(u0).second;
  rep.run = simulate(run_cfg, u0);
  if (rep.run.blew_up) throw NumericalError("erosion: simulation failed: " + rep.run.failure, 0.0);

  for (const auto& d : rep.run.diagnostics) {
    rep.trace.emplace_back(d.t, d.probes.front());
    if (!rep.t_star && d.probes.front() < 0.0) rep.t_star = d.t;
  }
  const std::vector<std::pair<double, double>> early(rep.trace.begin() + 1, rep.trace.begin() + 1 + kErosionFitSteps);
  rep.measured_rate = fit_slope(early);
  const auto& last = rep.run.snapshots.back().u;
  const auto it = std::min_element(last.values.begin(), last.values.end());
  rep.min_value = *it;
  rep.min_location = last.grid.node(static_cast<std::size_t>(it - last.values.begin()));
  return rep;
}

}  // namespace detail

/// Default run for erosion checks: the unscaled equation (unit viscosity), dt = 1e-4 up to t = 1.
inline SimConfig erosion_config(Grid grid = Grid(30.0, 4096)) {
  SimConfig cfg;
  cfg.grid = grid;
  cfg.dt = 1e-4;
  cfg.t_end = 1.0;
  cfg.snapshot_stride = 1000;
  return cfg;
}

/// Spectral run from the sampled profile; x* snaps to the nearest grid node.
inline ErosionReport verify_erosion(const SmoothProfile& u0, double x_star, const SimConfig& cfg) {
  const std::size_t node = cfg.grid.nearest_node(x_star);
  const double predicted = erosion_rate(u0, cfg.grid.node(node));
  return detail::run_erosion(sample(cfg.grid, [&](double x) { return u0(x).value; }), node, predicted, cfg);
}

/// Spectral run from grid data; the predicted rate is the trapezoid sum.
inline ErosionReport verify_erosion(const Field& u0, double x_star, const SimConfig& cfg) {
  require_same_grid(u0.grid, cfg.grid, "verify_erosion");
  const std::size_t node = cfg.grid.nearest_node(x_star);
  return detail::run_erosion(u0, node, erosion_rate(u0, node), cfg);
}

}  // namespace fowler
