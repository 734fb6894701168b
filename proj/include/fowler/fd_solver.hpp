#pragma once

// Explicit centred schemes on x_i = x0 + i dx, i = 0..M-1, dx = L/(M-1):
//
//   Burgers:  u_i^{n+1} = u_i^n + dt [ -((u_{i+1})^2 - (u_{i-1})^2)/(4 dx) + eps (u_{i+1} - 2u_i + u_{i-1})/dx^2 ]
//   Fowler:   the same plus -(L_{i+1} - L_{i-1})/(2 dx), with the one-sided sum
//             L_i = dx sum_{j=0}^{i} w_j (u_{i-j+1} - u_{i-j-1})/(2 dx),  w_j = (j dx)^{-1/3}.
//
// Dirichlet values are imposed at both ends; u is taken as zero outside the mesh.

#include "fowler/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fowler {

enum class FdModel { Burgers, Fowler };

/// Weight of the j = 0 term, where (j dx)^{-1/3} is undefined.
enum class ZeroWeight {
  CellAverage,  // dx^{-1} \int_0^dx z^{-1/3} dz = (3/2) dx^{-1/3}
  Skip,         // start the sum at j = 1
};

struct NonlocalSumOptions {
  ZeroWeight zero_weight = ZeroWeight::CellAverage;
  bool riemann_weight = true;  // multiply the sum by dx; false reproduces the printed unweighted sum
};

struct FdState {
  double t = 0.0;
  std::vector<double> u;
  double dx = 0.0;
  double eps = 0.0;
  double x0 = 0.0;

  std::size_t size() const noexcept { return u.size(); }
  double node(std::size_t i) const noexcept { return x0 + static_cast<double>(i) * dx; }
};

inline FdState make_fd_state(double length, std::size_t points, double eps, double x0 = 0.0) {
  if (points < 3) throw std::invalid_argument("FdState: need at least 3 points");
  if (!(length > 0.0)) throw std::invalid_argument("FdState: length must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("FdState: viscosity must be positive");
  FdState s;
  s.dx = length / static_cast<double>(points - 1);
  s.eps = eps;
  s.x0 = x0;
  s.u.assign(points, 0.0);
  return s;
}

/// CFL-Peclet step min(dx / max|u|, dx^2 / (2 eps)); the first term is +inf for u = 0.
inline double cfl_dt(const FdState& s) {
  if (!(s.eps > 0.0)) throw std::invalid_argument("cfl_dt: viscosity must be positive");
  double umax = 0.0;
  for (double v : s.u) umax = std::max(umax, std::abs(v));
  const double convective = umax > 0.0 ? s.dx / umax : std::numeric_limits<double>::infinity();
  return std::min(convective, s.dx * s.dx / (2.0 * s.eps));
}

/// Dirichlet data at x0 and x0 + L; zero by default.
struct FdBoundary {
  std::function<double(double)> left;
  std::function<double(double)> right;

  double left_at(double t) const { return left ? left(t) : 0.0; }
  double right_at(double t) const { return right ? right(t) : 0.0; }
};

struct FdStepOptions {
  bool strict = false;  // reject dt above the CFL-Peclet bound instead of warning
  NonlocalSumOptions nonlocal;
  FdBoundary boundary;
};

namespace detail {

inline void check_cfl(const FdState& s, double dt, const FdStepOptions& opt, std::vector<std::string>* warnings) {
  if (!(dt > 0.0)) throw std::invalid_argument("fd step: dt must be positive");
  const double bound = cfl_dt(s);
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the CFL-Peclet bound " << bound << " at t = " << s.t;
    if (opt.strict) throw NumericalError(msg.str(), bound);
    if (warnings != nullptr) warnings->push_back(msg.str());
  }
}

inline double sample(const std::vector<double>& u, long k) {
  if (k < 0 || k >= static_cast<long>(u.size())) return 0.0;
  return u[static_cast<std::size_t>(k)];
}

inline std::vector<double> nonlocal_weights(std::size_t m, double dx, const NonlocalSumOptions& opt) {
  std::vector<double> w(m);
  w[0] = opt.zero_weight == ZeroWeight::CellAverage ? 1.5 * std::pow(dx, -1.0 / 3.0) : 0.0;
  for (std::size_t j = 1; j < m; ++j) w[j] = std::pow(static_cast<double>(j) * dx, -1.0 / 3.0);
  if (opt.riemann_weight) {
    for (double& v : w) v *= dx;
  }
  return w;
}

// Fixed-order four-lane dot product; deterministic for a given build.
inline double dot(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc[0] += a[j] * b[j];
    acc[1] += a[j + 1] * b[j + 1];
    acc[2] += a[j + 2] * b[j + 2];
    acc[3] += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j) acc[0] += a[j] * b[j];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

}  // namespace detail

/// The one-sided sum L_i for every node, u extended by zero outside the mesh.
inline std::vector<double> nonlocal_flux(const FdState& s, const NonlocalSumOptions& opt = {}) {
  const std::size_t m = s.size();
  const auto w = detail::nonlocal_weights(m, s.dx, opt);
  // Reversed centred differences so that sum_j w_j D_{i-j} is a forward dot product.
  std::vector<double> rev(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto kk = static_cast<long>(k);
    rev[m - 1 - k] = (detail::sample(s.u, kk + 1) - detail::sample(s.u, kk - 1)) / (2.0 * s.dx);
  }
  std::vector<double> flux(m);
  for (std::size_t i = 0; i < m; ++i) flux[i] = detail::dot(w.data(), rev.data() + (m - 1 - i), i + 1);
  return flux;
}

/// L_i at an interior node.
inline double nonlocal_sum(const FdState& s, std::size_t i, const NonlocalSumOptions& opt = {}) {
  if (i == 0 || i + 1 >= s.size()) {
    std::ostringstream msg;
    msg << "nonlocal_sum: index " << i << " outside the interior (0, " << s.size() - 1 << ")";
    throw std::out_of_range(msg.str());
  }
  const auto w = detail::nonlocal_weights(i + 1, s.dx, opt);
  double acc = 0.0;
  for (std::size_t j = 0; j <= i; ++j) {
    const long k = static_cast<long>(i) - static_cast<long>(j);
    acc += w[j] * (detail::sample(s.u, k + 1) - detail::sample(s.u, k - 1)) / (2.0 * s.dx);
  }
  return acc;
}

namespace detail {

inline FdState explicit_update(const FdState& s, double dt, const std::vector<double>* flux, const FdStepOptions& opt) {
  const std::size_t m = s.size();
  FdState next = s;
  const double dx = s.dx;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double ul = s.u[i - 1], uc = s.u[i], ur = s.u[i + 1];
    double rhs = -(ur * ur - ul * ul) / (4.0 * dx) + s.eps * (ur - 2.0 * uc + ul) / (dx * dx);
    if (flux != nullptr) rhs -= ((*flux)[i + 1] - (*flux)[i - 1]) / (2.0 * dx);
    next.u[i] = uc + dt * rhs;
  }
  next.t = s.t + dt;
  next.u.front() = opt.boundary.left_at(next.t);
  next.u.back() = opt.boundary.right_at(next.t);
  return next;
}

}  // namespace detail

inline FdState step_burgers(const FdState& s, double dt, const FdStepOptions& opt = {},
                            std::vector<std::string>* warnings = nullptr) {
  detail::check_cfl(s, dt, opt, warnings);
  return detail::explicit_update(s, dt, nullptr, opt);
}

inline FdState step_fowler(const FdState& s, double dt, const FdStepOptions& opt = {},
                           std::vector<std::string>* warnings = nullptr) {
  detail::check_cfl(s, dt, opt, warnings);
  const auto flux = nonlocal_flux(s, opt.nonlocal);
  return detail::explicit_update(s, dt, &flux, opt);
}

struct FdConfig {
  FdModel model = FdModel::Fowler;
  double length = 30.0;
  std::size_t points = 4001;
  double x0 = 0.0;
  double eps = 0.1;
  double t_end = 1.0;
  double dt = 0.0;            // 0: CFL-Peclet step recomputed every step
  double cfl_factor = 1.0;    // multiplies the CFL-Peclet step
  double snapshot_interval = 0.25;
  FdStepOptions step;
  std::function<double(double, double)> exact;  // optional reference u(t, x)
};

struct FdSnapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct FdStepDiagnostics {
  double t = 0.0;
  double dt = 0.0;
  double min = 0.0;
  double argmin = 0.0;
  double max = 0.0;
  double mass = 0.0;  // sum u_i dx
};

struct FdReport {
  double dx = 0.0;
  double x0 = 0.0;
  std::vector<FdSnapshot> snapshots;
  std::vector<FdStepDiagnostics> diagnostics;
  std::vector<std::string> warnings;
  double run_min = 0.0;  // min over all steps and nodes
  double run_max = 0.0;
  double max_error = 0.0;  // against cfg.exact, when given
  bool blew_up = false;
  std::string failure;
};

inline double fd_mass(const FdState& s) {
  double acc = 0.0;
  for (double v : s.u) acc += v;
  return acc * s.dx;
}

/// March u0 to cfg.t_end, landing exactly on every snapshot time.
inline FdReport run_fd(const FdConfig& cfg, const std::vector<double>& u0) {
  if (u0.size() != cfg.points) throw ConfigError("initial", "initial data does not match the mesh");
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end", "must be positive");
  if (!(cfg.snapshot_interval > 0.0)) throw ConfigError("snapshot_interval", "must be positive");
  if (!(cfg.cfl_factor > 0.0)) throw ConfigError("cfl_factor", "must be positive");
  if (cfg.dt < 0.0) throw ConfigError("dt", "must be non-negative");
  FdState s = make_fd_state(cfg.length, cfg.points, cfg.eps, cfg.x0);
  s.u = u0;

  FdReport rep;
  rep.dx = s.dx;
  rep.x0 = s.x0;
  rep.run_min = std::numeric_limits<double>::infinity();
  rep.run_max = -std::numeric_limits<double>::infinity();

  auto record = [&](double dt) {
    FdStepDiagnostics d;
    d.t = s.t;
    d.dt = dt;
    const auto [lo, hi] = std::minmax_element(s.u.begin(), s.u.end());
    d.min = *lo;
    d.max = *hi;
    d.argmin = s.node(static_cast<std::size_t>(lo - s.u.begin()));
    d.mass = fd_mass(s);
    rep.run_min = std::min(rep.run_min, d.min);
    rep.run_max = std::max(rep.run_max, d.max);
    rep.diagnostics.push_back(d);
    if (cfg.exact) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        rep.max_error = std::max(rep.max_error, std::abs(s.u[i] - cfg.exact(s.t, s.node(i))));
      }
    }
  };

  record(0.0);
  rep.snapshots.push_back({0.0, s.u});
  std::size_t next_snap = 1;
  std::vector<std::string> warnings;
  while (s.t < cfg.t_end * (1.0 - 1e-14)) {
    const double target = std::min(cfg.t_end, static_cast<double>(next_snap) * cfg.snapshot_interval);
    double dt = cfg.dt > 0.0 ? cfg.dt : cfg.cfl_factor * cfl_dt(s);
    bool lands = false;
    if (s.t + dt >= target * (1.0 - 1e-14)) {
      dt = target - s.t;
      lands = true;
    }
    try {
      s = cfg.model == FdModel::Burgers ? step_burgers(s, dt, cfg.step, &warnings)
                                        : step_fowler(s, dt, cfg.step, &warnings);
    } catch (const NumericalError& e) {
      rep.blew_up = true;
      rep.failure = e.what();
      break;
    }
    if (lands) s.t = target;
    if (!std::all_of(s.u.begin(), s.u.end(), [](double v) { return std::isfinite(v); })) {
      rep.blew_up = true;
      std::ostringstream msg;
      msg << "non-finite state at t = " << s.t << "; reduce dt";
      rep.failure = msg.str();
      break;
    }
    record(dt);
    if (lands) {
      rep.snapshots.push_back({s.t, s.u});
      ++next_snap;
    }
  }
  // Keep only the first CFL warning; a violated bound usually repeats every step.
  if (!warnings.empty()) {
    rep.warnings.push_back(warnings.front());
    if (warnings.size() > 1) rep.warnings.push_back(std::to_string(warnings.size() - 1) + " further CFL warnings");
  }
  return rep;
}

}  // namespace fowler
