#pragma once

// Semigroup kernel K(t, .) = F^{-1}(e^{-t psi}) on a periodic grid. Its discrete spectrum is exactly
// e^{-t psi(xi_k)}, so composition and convolution are carried out mode by mode.

#include "fowler/grid.hpp"
#include "fowler/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fowler {

struct Kernel {
  double t = 0.0;
  Field values;
  Spectrum spectrum;

  const Grid& grid() const noexcept { return spectrum.grid; }
};

/// |e^{-t psi}| at the Nyquist mode; pointwise kernel values are trusted only below 1e-10.
inline double nyquist_envelope(double t, const SymbolTable& table) {
  return std::exp(-t * table.psi()[table.grid().nyquist_slot()].real());
}

inline constexpr double kResolutionThreshold = 1e-10;

inline Spectrum semigroup_spectrum(double t, const SymbolTable& table) {
  Spectrum s(table.grid());
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) s.coeffs[j] = std::exp(-t * table.psi()[j]);
  return s;
}

inline Kernel build_kernel(double t, const SymbolTable& table) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("build_kernel: t must be positive");
  Spectrum s = semigroup_spectrum(t, table);
  Field v = inverse(s);
  return Kernel{t, std::move(v), std::move(s)};
}

inline Field convolve(const Kernel& k, const Field& f) {
  require_same_grid(k.grid(), f.grid, "convolve");
  Spectrum s = forward(f);
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) s.coeffs[j] *= k.spectrum.coeffs[j];
  return inverse(s);
}

/// d/dx K(t, .), from the multiplier 2 i pi xi e^{-t psi}.
inline Field kernel_gradient(const Kernel& k) { return inverse(derivative(k.spectrum)); }

inline double l1_norm(const Field& f) {
  double acc = 0.0;
  for (double v : f.values) acc += std::abs(v);
  return acc * f.grid.dx();
}

struct KernelRow {
  double t = 0.0;
  double mass = 0.0;
  double min = 0.0;
  double argmin = 0.0;
  double grad_l1 = 0.0;
  double grad_l2 = 0.0;
  double semigroup_residual = 0.0;  // ||K(t)*K(t) - K(2t)||_2 / ||K(2t)||_2
  double nyquist_envelope = 0.0;
  bool resolved = false;
};

struct KernelDiagnostics {
  std::vector<KernelRow> rows;
  double grad_l2_slope = 0.0;  // least-squares slope of log ||d_x K||_2 against log t
  double grad_l1_slope = 0.0;
};

inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(t[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline KernelRow kernel_row(double t, const SymbolTable& table) {
  const Kernel k = build_kernel(t, table);
  KernelRow row;
  row.t = t;
  row.mass = mass(k.values);
  const auto it = std::min_element(k.values.values.begin(), k.values.values.end());
  row.min = *it;
  row.argmin = k.grid().node(static_cast<std::size_t>(it - k.values.values.begin()));
  const Field grad = kernel_gradient(k);
  row.grad_l1 = l1_norm(grad);
  row.grad_l2 = l2_norm(grad);
  const Kernel k2 = build_kernel(2.0 * t, table);
  Field composed = convolve(k, k.values);
  double diff = 0.0;
  for (std::size_t j = 0; j < composed.values.size(); ++j) {
    const double d = composed.values[j] - k2.values.values[j];
    diff += d * d;
  }
  row.semigroup_residual = std::sqrt(diff * k.grid().dx()) / l2_norm(k2.values);
  row.nyquist_envelope = nyquist_envelope(t, table);
  row.resolved = row.nyquist_envelope < kResolutionThreshold;
  return row;
}

/// Rows at n log-spaced times in [tmin, tmax] and slope fits of the gradient norms.
inline KernelDiagnostics kernel_diagnostics(double tmin, double tmax, std::size_t n, const SymbolTable& table) {
  if (!(tmin > 0.0) || !(tmax > tmin)) throw std::invalid_argument("kernel_diagnostics: need 0 < tmin < tmax");
  if (n < 2) throw std::invalid_argument("kernel_diagnostics: need at least two times");
  KernelDiagnostics out;
  std::vector<double> ts, l1, l2;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
    const double t = tmin * std::pow(tmax / tmin, frac);
    out.rows.push_back(kernel_row(t, table));
    ts.push_back(t);
    l1.push_back(out.rows.back().grad_l1);
    l2.push_back(out.rows.back().grad_l2);
  }
  out.grad_l2_slope = loglog_slope(ts, l2);
  out.grad_l1_slope = loglog_slope(ts, l1);
  return out;
}

}  // namespace fowler
