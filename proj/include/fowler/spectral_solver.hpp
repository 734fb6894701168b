#pragma once

// Mild-solution integrator for
//   u_t + (u^2/2)_x + I[u] - eps u_xx = 0
// in Fourier variables: d/dt u^ = -psi u^ + N(u^),  N(u^) = -i pi xi F(u^2).
// The linear part is integrated exactly (exponential time differencing, second order).

#include "fowler/errors.hpp"
#include "fowler/grid.hpp"
#include "fowler/kernel.hpp"
#include "fowler/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fowler {

struct SimConfig {
  Grid grid{30.0, 4096};
  double t_end = 1.0;
  double dt = 1e-3;
  bool dealias = true;
  std::size_t snapshot_stride = 100;
  double viscosity = 1.0;
  bool nonlinear = true;
  std::vector<std::size_t> probes;  // grid nodes recorded at every step

  std::size_t steps() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be positive");
    if (!(t_end >= dt)) throw ConfigError("t_end", "must be at least dt");
    const double n = std::round(t_end / dt);
    if (std::abs(n * dt - t_end) > 1e-9 * t_end) throw ConfigError("dt", "must divide t_end");
    if (snapshot_stride == 0) throw ConfigError("snapshot_stride", "must be positive");
    if (!(viscosity > 0.0)) throw ConfigError("viscosity", "must be positive");
    for (std::size_t j : probes) {
      if (j >= grid.size()) throw ConfigError("probes", "node index outside the grid");
    }
    return static_cast<std::size_t>(n);
  }
};

struct SpectralState {
  double t = 0.0;
  Spectrum uhat;
};

struct Snapshot {
  double t = 0.0;
  Field u;
};

struct StepDiagnostics {
  double t = 0.0;
  double l2 = 0.0;
  double mass = 0.0;       // mode-0 coefficient
  double min = 0.0;
  double argmin = 0.0;
  double tail_fraction = 0.0;  // spectral energy in |k| > N/4
  double energy_ratio = 0.0;   // ||u(t)|| / (e^{omega0 t} ||u0||)
  std::vector<double> probes;  // u at SimConfig::probes
};

struct SimReport {
  SimConfig config;
  SymbolConstants constants;
  double omega0 = 0.0;
  std::vector<Snapshot> snapshots;
  std::vector<StepDiagnostics> diagnostics;
  std::vector<std::string> warnings;
  double max_energy_ratio = 0.0;
  bool blew_up = false;
  std::string failure;
};

/// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2; six-term Taylor series for |z| < 1e-2.
inline complex etd_phi1(complex z) {
  if (std::abs(z) < 1e-2) {
    complex term = 1.0, sum = 1.0;
    for (int n = 1; n < 6; ++n) {
      term *= z / static_cast<double>(n + 1);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

inline complex etd_phi2(complex z) {
  if (std::abs(z) < 1e-2) {
    complex term = 0.5, sum = 0.5;
    for (int n = 1; n < 6; ++n) {
      term *= z / static_cast<double>(n + 2);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

/// Largest retained |k| under the 2/3 rule.
inline long dealias_cutoff(const Grid& g) { return static_cast<long>(g.size()) / 3; }

inline void truncate_modes(Spectrum& s, long cutoff) {
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    if (std::labs(s.grid.mode(j)) > cutoff) s.coeffs[j] = 0.0;
  }
}

/// -i pi xi F(u^2), i.e. the transform of -(u^2/2)_x, with optional 2/3-rule dealiasing.
inline Spectrum nonlinear_rhs(const Spectrum& uhat, bool dealias = true) {
  const long cutoff = dealias_cutoff(uhat.grid);
  Field u = [&] {
    if (!dealias) return inverse(uhat);
    Spectrum t = uhat;
    truncate_modes(t, cutoff);
    return inverse(t);
  }();
  for (double& v : u.values) v *= v;
  if (!u.finite()) throw NumericalError("nonlinear term overflowed; reduce dt or the initial amplitude");
  Spectrum w = forward(u);
  if (dealias) truncate_modes(w, cutoff);
  return apply_multiplier(w, [](double xi) { return complex(0.0, -std::numbers::pi * xi); });
}

/// ETD2 step coefficients for a fixed dt: e^{-dt psi}, dt phi_1(-dt psi), dt phi_2(-dt psi).
class SpectralStepper {
 public:
  SpectralStepper(const SymbolTable& table, double dt, bool dealias = true, bool nonlinear = true)
      : table_(&table), dt_(dt), dealias_(dealias), nonlinear_(nonlinear) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SpectralStepper: dt must be positive");
    const std::size_t n = table.grid().size();
    e_.resize(n);
    p1_.resize(n);
    p2_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const complex z = -dt * table.psi()[j];
      e_[j] = std::exp(z);
      p1_[j] = dt * etd_phi1(z);
      p2_[j] = dt * etd_phi2(z);
    }
  }

  double dt() const noexcept { return dt_; }
  bool dealias() const noexcept { return dealias_; }
  bool nonlinear() const noexcept { return nonlinear_; }
  const SymbolTable& table() const noexcept { return *table_; }

  SpectralState step(const SpectralState& s) const {
    require_same_grid(s.uhat.grid, table_->grid(), "step");
    Spectrum next(s.uhat.grid);
    const std::size_t n = next.coeffs.size();
    if (!nonlinear_) {
      for (std::size_t j = 0; j < n; ++j) next.coeffs[j] = e_[j] * s.uhat.coeffs[j];
    } else {
      const Spectrum n0 = nonlinear_rhs(s.uhat, dealias_);
      Spectrum a(s.uhat.grid);
      for (std::size_t j = 0; j < n; ++j) a.coeffs[j] = e_[j] * s.uhat.coeffs[j] + p1_[j] * n0.coeffs[j];
      const Spectrum n1 = nonlinear_rhs(a, dealias_);
      for (std::size_t j = 0; j < n; ++j) next.coeffs[j] = a.coeffs[j] + p2_[j] * (n1.coeffs[j] - n0.coeffs[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(next.coeffs[j].real()) || !std::isfinite(next.coeffs[j].imag())) {
        std::ostringstream msg;
        msg << "step: non-finite state at t = " << s.t + dt_ << "; reduce dt";
        throw NumericalError(msg.str());
      }
    }
    return {s.t + dt_, std::move(next)};
  }

 private:
  const SymbolTable* table_;
  double dt_;
  bool dealias_;
  bool nonlinear_;
  std::vector<complex> e_, p1_, p2_;
};

inline SpectralState step(const SpectralState& state, const SymbolTable& table, double dt, bool dealias = true,
                          bool nonlinear = true) {
  return SpectralStepper(table, dt, dealias, nonlinear).step(state);
}

namespace detail {

inline StepDiagnostics diagnose(const SpectralState& s, const Field& u, double omega0, double l2_initial) {
  StepDiagnostics d;
  d.t = s.t;
  d.l2 = l2_norm(s.uhat);
  d.mass = s.uhat.coeffs[0].real();
  const auto it = std::min_element(u.values.begin(), u.values.end());
  d.min = *it;
  d.argmin = u.grid.node(static_cast<std::size_t>(it - u.values.begin()));
  d.tail_fraction = tail_fraction(s.uhat, static_cast<long>(u.grid.size()) / 4);
  const double bound = std::exp(omega0 * s.t) * l2_initial;
  d.energy_ratio = bound > 0.0 ? d.l2 / bound : 0.0;
  return d;
}

}  // namespace detail

inline constexpr double kEnergySlack = 1e-6;
inline constexpr double kResolvedTail = 1e-6;

/// Time-step u0 to cfg.t_end. A non-finite state stops the run; the report
/// keeps every snapshot up to the last good state and sets blew_up.
inline SimReport simulate(const SimConfig& cfg, const Field& u0, const SymbolTable& table) {
  const std::size_t steps = cfg.steps();
  require_same_grid(cfg.grid, u0.grid, "simulate");
  require_same_grid(cfg.grid, table.grid(), "simulate");
  if (!u0.finite()) throw ConfigError("initial", "initial field is not finite");

  SimReport rep;
  rep.config = cfg;
  rep.constants = table.constants();
  rep.omega0 = table.omega0();

  const SpectralStepper stepper(table, cfg.dt, cfg.dealias, cfg.nonlinear);
  SpectralState state{0.0, forward(u0)};
  const double l2_initial = l2_norm(state.uhat);
  bool tail_warned = false;

  auto record = [&](const Field& u, bool snapshot) {
    auto d = detail::diagnose(state, u, rep.omega0, l2_initial);
    for (std::size_t j : cfg.probes) d.probes.push_back(u.values[j]);
    rep.diagnostics.push_back(d);
    rep.max_energy_ratio = std::max(rep.max_energy_ratio, d.energy_ratio);
    if (!tail_warned && d.tail_fraction > kResolvedTail) {
      std::ostringstream msg;
      msg << "under-resolved nonlinearity: tail fraction " << d.tail_fraction << " at t = " << d.t;
      rep.warnings.push_back(msg.str());
      tail_warned = true;
    }
    if (snapshot) rep.snapshots.push_back({state.t, u});
  };

  record(u0, true);
  for (std::size_t n = 1; n <= steps; ++n) {
    try {
      state = stepper.step(state);
    } catch (const NumericalError& e) {
      rep.blew_up = true;
      rep.failure = e.what();
      break;
    }
    // Exact step count times dt avoids accumulated drift in snapshot times.
    state.t = static_cast<double>(n) * cfg.dt;
    const bool snap = (n % cfg.snapshot_stride == 0) || n == steps;
    record(inverse(state.uhat), snap);
  }
  // Persist the last good state.
  if (rep.blew_up && rep.snapshots.back().t != rep.diagnostics.back().t) {
    rep.snapshots.push_back({state.t, inverse(state.uhat)});
  }
  if (rep.max_energy_ratio > 1.0 + kEnergySlack) {
    std::ostringstream msg;
    msg << "energy bound exceeded: max ||u(t)|| / (e^{omega0 t} ||u0||) = " << rep.max_energy_ratio;
    rep.warnings.push_back(msg.str());
  }
  return rep;
}

inline SimReport simulate(const SimConfig& cfg, const Field& u0) {
  const SymbolTable table(cfg.grid, cfg.viscosity);
  return simulate(cfg, u0, table);
}

/// Relative L2 deviation of the final snapshot from the mild formula
///   u^(t) = e^{-t psi} u^_0 + \int_0^t e^{-(t-s) psi} N(u^(s)) ds,
/// the integral taken by the trapezoid rule over every `every`-th snapshot.
inline double duhamel_residual(const SimReport& report, const Field& u0, const SymbolTable& table,
                               std::size_t every = 1) {
  if (every == 0) throw std::invalid_argument("duhamel_residual: stride must be positive");
  std::vector<const Snapshot*> snaps;
  for (std::size_t i = 0; i < report.snapshots.size(); i += every) snaps.push_back(&report.snapshots[i]);
  if (snaps.back() != &report.snapshots.back()) {
    throw std::invalid_argument("duhamel_residual: stride must land on the final snapshot");
  }
  if (snaps.size() < 8) throw std::invalid_argument("duhamel_residual: need at least 8 snapshots");
  if (snaps.front()->t != 0.0) throw std::invalid_argument("duhamel_residual: first snapshot must be t = 0");

  const double t = snaps.back()->t;
  const Spectrum target = forward(snaps.back()->u);
  Spectrum pred = forward(u0);
  for (std::size_t j = 0; j < pred.coeffs.size(); ++j) pred.coeffs[j] *= std::exp(-t * table.psi()[j]);

  if (report.config.nonlinear) {
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const double left = i > 0 ? snaps[i]->t - snaps[i - 1]->t : 0.0;
      const double right = i + 1 < snaps.size() ? snaps[i + 1]->t - snaps[i]->t : 0.0;
      const double w = 0.5 * (left + right);
      const Spectrum nl = nonlinear_rhs(forward(snaps[i]->u), report.config.dealias);
      const double lag = t - snaps[i]->t;
      for (std::size_t j = 0; j < pred.coeffs.size(); ++j) {
        pred.coeffs[j] += w * std::exp(-lag * table.psi()[j]) * nl.coeffs[j];
      }
    }
  }
  const double ref = l2_norm(target);
  const double diff = l2_norm(pred - target);
  return ref > 0.0 ? diff / ref : diff;
}

struct StabilityRow {
  double scale = 0.0;          // v0 = u0 + scale (v0_given - u0)
  double initial_gap = 0.0;    // ||u0 - v0||
  std::vector<double> times;   // snapshot times
  std::vector<double> running_sup;  // sup_{s <= t} ||u(s) - v(s)||
  double ratio = 0.0;          // sup over the run / initial_gap (0 when both vanish)

  /// sup_{s <= horizon} ||u - v|| / ||u0 - v0||.
  double ratio_at(double horizon) const {
    double sup = 0.0;
    for (std::size_t i = 0; i < times.size() && times[i] <= horizon + 1e-12; ++i) sup = running_sup[i];
    return initial_gap > 0.0 ? sup / initial_gap : 0.0;
  }
};

/// L2 stability ladder: runs u0 and u0 + s (v0 - u0) for each scale s.
inline std::vector<StabilityRow> stability_probe(const Field& u0, const Field& v0, const SimConfig& cfg,
                                                 const std::vector<double>& scales = {1.0}) {
  require_same_grid(u0.grid, v0.grid, "stability_probe");
  const SymbolTable table(cfg.grid, cfg.viscosity);
  const SimReport base = simulate(cfg, u0, table);
  std::vector<StabilityRow> rows;
  for (double s : scales) {
    Field v = u0;
    for (std::size_t j = 0; j < v.values.size(); ++j) v.values[j] += s * (v0.values[j] - u0.values[j]);
    const SimReport other = simulate(cfg, v, table);
    StabilityRow row;
    row.scale = s;
    Field gap0 = v;
    for (std::size_t j = 0; j < gap0.values.size(); ++j) gap0.values[j] -= u0.values[j];
    row.initial_gap = l2_norm(gap0);
    double sup = 0.0;
    const std::size_t n = std::min(base.snapshots.size(), other.snapshots.size());
    for (std::size_t i = 0; i < n; ++i) {
      Field d = other.snapshots[i].u;
      for (std::size_t j = 0; j < d.values.size(); ++j) d.values[j] -= base.snapshots[i].u.values[j];
      sup = std::max(sup, l2_norm(d));
      row.times.push_back(base.snapshots[i].t);
      row.running_sup.push_back(sup);
    }
    row.ratio = row.initial_gap > 0.0 ? sup / row.initial_gap : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fowler
