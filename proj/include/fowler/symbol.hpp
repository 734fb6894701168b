#pragma once

// Symbol of I - d^2/dx^2 (optionally I - eps d^2/dx^2):
//
//   psi(xi) = 4 pi^2 eps xi^2 - a |xi|^{4/3} + i b xi |xi|^{1/3}
//
// The nonlocal part equals C_I \int_{-inf}^0 (e^{2 i pi xi z} - 1 - 2 i pi xi z) |z|^{-7/3} dz
// with C_I = 4/9. Candidate closed-form constants are checked against a
// direct quadrature of that integral and the matching set becomes canonical.

#include "fowler/errors.hpp"
#include "fowler/grid.hpp"
#include "fowler/quadrature.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace fowler {

inline constexpr double kCI = 4.0 / 9.0;

struct SymbolConstants {
  std::string name;
  double a = 0.0;
  double b = 0.0;
};

/// The candidate (a, b) sets.
///  - "gamma-half": a = Gamma(2/3)/2, b = Gamma(2/3) sqrt(3)/2.
///  - "gamma-half-4pi2": the same times 4 pi^2.
///  - "gamma-half-2pi43": the same times (2 pi)^{4/3}, i.e. the transform of
///    1_{R+} |x|^{-1/3} evaluated in the e^{-2 i pi x xi} convention.
inline std::array<SymbolConstants, 3> candidate_constants() {
  using std::numbers::pi;
  const double g = std::tgamma(2.0 / 3.0);
  const double s3 = std::sqrt(3.0);
  const double f4 = 4.0 * pi * pi;
  const double f43 = std::pow(2.0 * pi, 4.0 / 3.0);
  return {{
      {"gamma-half", 0.5 * g, 0.5 * s3 * g},
      {"gamma-half-4pi2", 0.5 * f4 * g, 0.5 * s3 * f4 * g},
      {"gamma-half-2pi43", 0.5 * f43 * g, 0.5 * s3 * f43 * g},
  }};
}

/// Nonlocal multiplier -a |xi|^{4/3} + i b xi |xi|^{1/3}.
inline complex nonlocal_symbol(double xi, const SymbolConstants& c) {
  const double ax = std::abs(xi);
  const double cube = std::cbrt(ax);
  return {-c.a * ax * cube, c.b * xi * cube};
}

inline complex psi_closed(double xi, const SymbolConstants& c, double viscosity = 1.0) {
  using std::numbers::pi;
  return complex(4.0 * pi * pi * viscosity * xi * xi, 0.0) + nonlocal_symbol(xi, c);
}

struct OracleValue {
  complex value;
  double error = 0.0;  // absolute error estimate
};

namespace detail {

// \int_Z^inf e^{i k s} s^{-p} ds by repeated integration by parts:
//   -e^{ikZ} sum_m (p)_m / (i k)^{m+1} Z^{-p-m}
// Asymptotic in kZ; summed until the terms stop decreasing.
inline OracleValue oscillatory_tail(double k, double p, double z) {
  const complex ik(0.0, k);
  complex term = -std::exp(ik * z) * std::pow(z, -p) / ik;
  complex sum = term;
  double last = std::abs(term);
  for (int m = 0; m < 200; ++m) {
    const complex next = term * (p + m) / (ik * z);
    const double mag = std::abs(next);
    if (mag >= last) break;
    sum += next;
    term = next;
    last = mag;
    if (mag < 1e-20) break;
  }
  return {sum, last};
}

}  // namespace detail

/// Quadrature of the nonlocal part C_I \int_{-inf}^0 (e^{2 i pi xi z} - 1 - 2 i pi xi z)|z|^{-7/3} dz.
///
/// With s = -z and k = 2 pi |xi| the real part is C_I \int_0^inf (cos ks - 1) s^{-7/3} ds and the
/// imaginary part sign(xi) C_I \int_0^inf (ks - sin ks) s^{-7/3} ds. The interval is split into
/// [0, d] (term-by-term Taylor integration), [d, Z] (panelled Gauss-Kronrod) and [Z, inf)
/// (power parts exactly, oscillatory parts by asymptotic expansion).
inline OracleValue psi_oracle_nonlocal(double xi, double tolerance = 1e-8) {
  using std::numbers::pi;
  if (!std::isfinite(xi)) throw std::invalid_argument("psi_oracle: non-finite frequency");
  if (xi == 0.0) return {};
  const double k = 2.0 * pi * std::abs(xi);
  constexpr double p = 7.0 / 3.0;
  const double d = std::min(0.5, 0.5 / k);
  const double z_far = std::max(40.0, 40.0 / k);

  // Inner piece: sum of (-1)^n k^{2n}/(2n)! d^{2n-4/3}/(2n-4/3) and the odd analogue.
  double re = 0.0, im = 0.0, series_err = 0.0;
  {
    double fact_even = 1.0;  // (2n)!
    double fact_odd = 1.0;   // (2n+1)!
    double kd_pow = 1.0;
    for (int n = 1; n < 40; ++n) {
      fact_even *= (2.0 * n - 1.0) * (2.0 * n);
      fact_odd *= (2.0 * n) * (2.0 * n + 1.0);
      kd_pow = std::pow(k, 2.0 * n);
      const double sign = (n % 2 == 1) ? -1.0 : 1.0;
      const double e = 2.0 * n - 4.0 / 3.0;
      const double t_re = sign * kd_pow / fact_even * std::pow(d, e) / e;
      const double o = 2.0 * n + 1.0 - 4.0 / 3.0;
      const double t_im = -sign * kd_pow * k / fact_odd * std::pow(d, o) / o;
      re += t_re;
      im += t_im;
      series_err = std::abs(t_re) + std::abs(t_im);
      if (series_err < 1e-20) break;
    }
  }

  const double half_period = pi / k;
  const auto mid_re = quad::panels([&](double s) { return (std::cos(k * s) - 1.0) * std::pow(s, -p); },
                                   d, z_far, half_period, 1e-12);
  const auto mid_im = quad::panels([&](double s) { return (k * s - std::sin(k * s)) * std::pow(s, -p); },
                                   d, z_far, half_period, 1e-12);
  re += mid_re.value;
  im += mid_im.value;

  const auto tail = detail::oscillatory_tail(k, p, z_far);
  re += tail.value.real() - std::pow(z_far, 1.0 - p) / (p - 1.0);
  im += k * std::pow(z_far, 2.0 - p) / (p - 2.0) - tail.value.imag();

  const double err = kCI * (series_err + mid_re.error + mid_im.error + 2.0 * tail.error);
  if (!(err <= tolerance)) {
    throw NumericalError("psi_oracle: quadrature did not reach requested accuracy", err);
  }
  const double sgn = xi > 0 ? 1.0 : -1.0;
  return {complex(kCI * re, sgn * kCI * im), err};
}

inline OracleValue psi_oracle(double xi, double viscosity = 1.0) {
  using std::numbers::pi;
  OracleValue v = psi_oracle_nonlocal(xi);
  v.value += 4.0 * pi * pi * viscosity * xi * xi;
  return v;
}

/// Frequencies at which candidate constants are compared with the oracle.
inline constexpr std::array<double, 4> kAdjudicationFrequencies{0.5, 1.0, 2.0, 4.0};

struct CandidateResidual {
  SymbolConstants constants;
  double residual = 0.0;  // max relative deviation from the oracle
};

struct ConstantSelection {
  SymbolConstants selected;
  std::vector<CandidateResidual> candidates;
  double fitted_a = 0.0;  // least squares of -Re(nonlocal) against xi^{4/3}
  double fitted_b = 0.0;  // least squares of Im(nonlocal) at -xi against -xi^{4/3}
  double selected_residual = 0.0;
  bool matched_candidate = false;
};

/// Relative deviation of a closed-form set from oracle values sampled at
/// +-xi for xi in kAdjudicationFrequencies.
inline double candidate_residual(const SymbolConstants& c, const std::vector<std::pair<double, complex>>& oracle) {
  double worst = 0.0;
  for (const auto& [xi, ref] : oracle) {
    worst = std::max(worst, std::abs(nonlocal_symbol(xi, c) - ref) / std::abs(ref));
  }
  return worst;
}

inline ConstantSelection adjudicate_constants(double match_tolerance = 1e-6) {
  std::vector<std::pair<double, complex>> oracle;
  for (double xi : kAdjudicationFrequencies) {
    oracle.emplace_back(xi, psi_oracle_nonlocal(xi).value);
    oracle.emplace_back(-xi, psi_oracle_nonlocal(-xi).value);
  }

  ConstantSelection sel;
  double num_a = 0.0, num_b = 0.0, den = 0.0;
  for (const auto& [xi, ref] : oracle) {
    if (xi <= 0) continue;
    const double h = std::pow(xi, 4.0 / 3.0);
    num_a += -ref.real() * h;
    den += h * h;
  }
  for (const auto& [xi, ref] : oracle) {
    if (xi >= 0) continue;
    const double h = -std::pow(-xi, 4.0 / 3.0);  // xi |xi|^{1/3}
    num_b += ref.imag() * h;
  }
  sel.fitted_a = num_a / den;
  sel.fitted_b = num_b / den;

  int matches = 0;
  for (const auto& c : candidate_constants()) {
    const double r = candidate_residual(c, oracle);
    sel.candidates.push_back({c, r});
    if (r <= match_tolerance) {
      ++matches;
      sel.selected = c;
      sel.selected_residual = r;
    }
  }
  sel.matched_candidate = matches == 1;
  if (!sel.matched_candidate) {
    sel.selected = {"oracle-fit", sel.fitted_a, sel.fitted_b};
    sel.selected_residual = candidate_residual(sel.selected, oracle);
  }
  return sel;
}

/// Adjudicated once per process.
inline const ConstantSelection& constant_selection() {
  static const ConstantSelection sel = adjudicate_constants();
  return sel;
}

inline const SymbolConstants& canonical_constants() { return constant_selection().selected; }

/// -min over real xi of Re psi, from the stationary point xi^{2/3} = a / (6 pi^2 eps).
inline double omega0(double a, double viscosity = 1.0) {
  using std::numbers::pi;
  if (a <= 0.0) return 0.0;
  const double xi = std::pow(a / (6.0 * pi * pi * viscosity), 1.5);
  const double re = 4.0 * pi * pi * viscosity * xi * xi - a * std::pow(xi, 4.0 / 3.0);
  return -re;
}

/// Positive root of Re psi: a^{3/2} / (8 pi^3) for unit viscosity.
inline double sign_change_frequency(double a, double viscosity = 1.0) {
  using std::numbers::pi;
  return std::pow(a / (4.0 * pi * pi * viscosity), 1.5);
}

/// \int_0^1 (1 - tau) tau^{-2/3} dtau, which equals 9/4 = 1 / C_I.
inline quad::Result taylor_reduction_constant() {
  return quad::tanh_sinh([](double t) { return (1.0 - t) * std::pow(t, -2.0 / 3.0); }, 0.0, 1.0, 1e-15);
}

class SymbolTable {
 public:
  SymbolTable(Grid grid, SymbolConstants constants, double viscosity = 1.0)
      : grid_(grid), constants_(std::move(constants)), viscosity_(viscosity) {
    if (!(viscosity > 0.0)) throw std::invalid_argument("SymbolTable: viscosity must be positive");
    psi_.resize(grid_.size());
    const std::size_t nyq = grid_.nyquist_slot();
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      complex v = psi_closed(grid_.frequency(j), constants_, viscosity_);
      if (j == nyq) v = v.real();
      psi_[j] = v;
    }
    psi_[0] = 0.0;
    omega0_ = fowler::omega0(constants_.a, viscosity_);
  }

  /// Table on the adjudicated constants.
  explicit SymbolTable(Grid grid, double viscosity = 1.0) : SymbolTable(grid, canonical_constants(), viscosity) {}

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<complex>& psi() const noexcept { return psi_; }
  const SymbolConstants& constants() const noexcept { return constants_; }
  double a() const noexcept { return constants_.a; }
  double b() const noexcept { return constants_.b; }
  double ci() const noexcept { return kCI; }
  double viscosity() const noexcept { return viscosity_; }
  double omega0() const noexcept { return omega0_; }

  /// psi minus its diffusive part, i.e. the multiplier of I alone.
  complex nonlocal(std::size_t j) const {
    using std::numbers::pi;
    const double xi = grid_.frequency(j);
    return psi_[j] - 4.0 * pi * pi * viscosity_ * xi * xi;
  }

 private:
  Grid grid_;
  SymbolConstants constants_;
  double viscosity_;
  std::vector<complex> psi_;
  double omega0_ = 0.0;
};

inline double omega0(const SymbolTable& table) { return table.omega0(); }

}  // namespace fowler
