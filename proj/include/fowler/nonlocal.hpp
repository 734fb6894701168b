#pragma once

// The one-sided operator
//   I[phi](x) = \int_0^inf zeta^{-1/3} phi''(x - zeta) dzeta
// and its flux form L[phi] (phi' in place of phi''), evaluated three ways:
// directly from the definition, from the Levy-type formula
//   I[phi](x) = C_I \int_{-inf}^0 (phi(x+z) - phi(x) - phi'(x) z) |z|^{-7/3} dz,
// and as a Fourier multiplier on a periodic grid.

#include "fowler/errors.hpp"
#include "fowler/grid.hpp"
#include "fowler/quadrature.hpp"
#include "fowler/symbol.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fowler {

struct ProfileSample {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Smooth profile phi with its first two derivatives. phi vanishes right of
/// `hi`; left of `lo` it vanishes, or with `affine_left` continues as the
/// affine extrapolation phi(lo) + phi'(lo)(x - lo).
class SmoothProfile {
 public:
  using Eval = std::function<ProfileSample(double)>;

  SmoothProfile(Eval eval, double lo, double hi, bool affine_left = false)
      : eval_(std::move(eval)), lo_(lo), hi_(hi), affine_left_(affine_left) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("SmoothProfile: support must be a finite interval");
    }
    edge_ = eval_(lo_);
  }

  ProfileSample operator()(double x) const {
    if (x > hi_) return {};
    if (x < lo_) {
      if (!affine_left_) return {};
      return {edge_.value + edge_.d1 * (x - lo_), edge_.d1, 0.0};
    }
    return eval_(x);
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  bool affine_left() const noexcept { return affine_left_; }
  const ProfileSample& left_edge() const noexcept { return edge_; }

  /// A exp(-((x - c)/s)^2), support c +- 9 s.
  static SmoothProfile gaussian(double center = 0.0, double scale = 1.0, double amplitude = 1.0) {
    auto f = [=](double x) {
      const double r = (x - center) / scale;
      const double v = amplitude * std::exp(-r * r);
      return ProfileSample{v, v * (-2.0 * r / scale), v * (4.0 * r * r - 2.0) / (scale * scale)};
    };
    return SmoothProfile(f, center - 9.0 * scale, center + 9.0 * scale);
  }

  /// A exp(-1/(1 - r^2)) for |r| < 1, r = (x - c)/R; zero otherwise.
  static SmoothProfile bump(double center, double radius = 1.0, double amplitude = 1.0) {
    auto f = [=](double x) {
      const double r = (x - center) / radius;
      const double q = 1.0 - r * r;
      if (q <= 0.0) return ProfileSample{};
      const double v = amplitude * std::exp(-1.0 / q);
      const double g = -2.0 * r / (radius * q * q);  // (log phi)'
      const double dg = -2.0 / (radius * radius) * (1.0 / (q * q) + 4.0 * r * r / (q * q * q));
      return ProfileSample{v, v * g, v * (g * g + dg)};
    };
    return SmoothProfile(f, center - radius, center + radius);
  }

  /// slope * x + intercept on [lo, hi], continued affinely to the left.
  static SmoothProfile affine(double slope, double intercept, double lo, double hi) {
    auto f = [=](double x) { return ProfileSample{slope * x + intercept, slope, 0.0}; };
    return SmoothProfile(f, lo, hi, true);
  }

  /// Sum of two profiles (support is the union).
  friend SmoothProfile operator+(const SmoothProfile& a, const SmoothProfile& b) {
    if (a.affine_left_ || b.affine_left_) {
      throw std::invalid_argument("SmoothProfile: sums of affine-tailed profiles are not supported");
    }
    auto f = [a, b](double x) {
      const auto p = a(x), q = b(x);
      return ProfileSample{p.value + q.value, p.d1 + q.d1, p.d2 + q.d2};
    };
    return SmoothProfile(f, std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
  }

 private:
  Eval eval_;
  double lo_;
  double hi_;
  bool affine_left_;
  ProfileSample edge_;
};

/// Largest relative mismatch between the supplied derivatives and centred
/// differences of the profile at `points`.
inline double derivative_consistency(const SmoothProfile& p, const std::vector<double>& points, double h = 1e-4) {
  double worst = 0.0;
  for (double x : points) {
    const auto c = p(x);
    const double d1 = (p(x + h).value - p(x - h).value) / (2.0 * h);
    const double d2 = (p(x + h).d1 - p(x - h).d1) / (2.0 * h);
    worst = std::max({worst, std::abs(d1 - c.d1), std::abs(d2 - c.d2)});
  }
  return worst;
}

struct Diagnostics {
  std::vector<std::string> warnings;
};

inline constexpr double kRouteTolerance = 1e-8;

namespace detail {

inline double checked(const quad::Result& r, const char* what) {
  if (!(r.error <= kRouteTolerance) || !std::isfinite(r.value)) {
    std::ostringstream msg;
    msg << what << ": quadrature error estimate " << r.error << " exceeds " << kRouteTolerance;
    throw NumericalError(msg.str(), r.error);
  }
  return r.value;
}

// \int_0^inf zeta^{-1/3} g(x - zeta) dzeta where g vanishes outside [lo, hi];
// zeta = s^3 turns it into \int 3 s g(x - s^3) ds.
template <class G>
quad::Result one_sided_weighted(G&& g, double x, double lo, double hi) {
  if (x <= lo) return {};
  const double za = std::max(0.0, x - hi);
  const double zb = x - lo;
  const double sa = std::cbrt(za), sb = std::cbrt(zb);
  return quad::adaptive([&](double s) { return 3.0 * s * g(x - s * s * s); }, sa, sb, 1e-13);
}

}  // namespace detail

/// I[phi](x) from its definition.
inline double apply_I_definition(const SmoothProfile& p, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("apply_I_definition: non-finite x");
  const auto r = detail::one_sided_weighted([&](double y) { return p(y).d2; }, x, p.lo(), p.hi());
  return detail::checked(r, "apply_I_definition");
}

/// L[phi](x) from its definition; requires phi' to vanish left of the support.
inline double apply_L_definition(const SmoothProfile& p, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("apply_L_definition: non-finite x");
  if (p.affine_left() && p.left_edge().d1 != 0.0) {
    throw std::invalid_argument("apply_L_definition: L diverges for a non-constant affine left tail");
  }
  const auto r = detail::one_sided_weighted([&](double y) { return p(y).d1; }, x, p.lo(), p.hi());
  return detail::checked(r, "apply_L_definition");
}

/// Inner Taylor radius of the formula route, relative to the support width.
inline constexpr double kInnerRadiusFraction = 1e-8;

/// I[phi](x) from the singular-integral formula with C_I = 4/9.
///
/// With s = -z the integrand is (phi(x-s) - phi(x) + phi'(x) s) s^{-7/3}. On [0, d] it is replaced
/// by its Taylor form phi''(x)/2 s^{-1/3}, integrated exactly; on [d, x - lo] it is integrated on
/// geometrically graded panels; beyond x - lo the numerator is affine in s and integrated exactly.
inline double apply_I_formula(const SmoothProfile& p, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("apply_I_formula: non-finite x");
  if (x <= p.lo()) return 0.0;  // phi is affine (or zero) on (-inf, x]
  const auto px = p(x);
  const double z_edge = x - p.lo();
  const double d = std::min(kInnerRadiusFraction * p.width(), z_edge);

  double total = 0.5 * px.d2 * 1.5 * std::pow(d, 2.0 / 3.0);
  double err = 0.0;

  // For small s the numerator is evaluated through its Taylor remainder
  // \int_0^s (s - r) phi''(x - r) dr, avoiding the cancellation in the direct difference.
  const double s_switch = 1e-3 * p.width();
  auto g = [&](double s) {
    double num;
    if (s < s_switch) {
      num = boost::math::quadrature::gauss<double, 16>::integrate(
          [&](double r) { return (s - r) * p(x - r).d2; }, 0.0, s);
    } else {
      num = p(x - s).value - px.value + px.d1 * s;
    }
    return num * std::pow(s, -7.0 / 3.0);
  };
  double a = std::max(d, x - p.hi());
  if (a > d) {
    // phi(x - s) = 0 on [d, x - hi]: numerator is affine there.
    const double c0 = -px.value, c1 = px.d1;
    total += c0 * 0.75 * (std::pow(d, -4.0 / 3.0) - std::pow(a, -4.0 / 3.0)) +
             c1 * 3.0 * (std::pow(d, -1.0 / 3.0) - std::pow(a, -1.0 / 3.0));
  }
  while (a < z_edge) {
    const double step = 0.05 * p.width();
    const double b = std::min(z_edge, a < step ? std::min(10.0 * a, step) : a + step);
    const auto r = quad::adaptive(g, a, b, 1e-11, 10);
    total += r.value;
    err += r.error;
    a = b;
  }

  // Beyond the support edge phi(x - s) is the left tail T(x - s).
  const auto e = p.left_edge();
  const double tail_const = p.affine_left() ? e.value + e.d1 * (x - p.lo()) : 0.0;
  const double tail_slope = p.affine_left() ? e.d1 : 0.0;
  const double c0 = tail_const - px.value;
  const double c1 = px.d1 - tail_slope;
  total += c0 * 0.75 * std::pow(z_edge, -4.0 / 3.0) + c1 * 3.0 * std::pow(z_edge, -1.0 / 3.0);

  return kCI * detail::checked({total, err}, "apply_I_formula");
}

/// Support of a sampled field: first and last node with |f| above `floor`
/// times its maximum. Returns {0, 0} for the zero field.
inline std::pair<double, double> numerical_support(const Field& f, double floor = 1e-14) {
  double peak = 0.0;
  for (double v : f.values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return {0.0, 0.0};
  std::size_t first = f.values.size(), last = 0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    if (std::abs(f.values[j]) > floor * peak) {
      first = std::min(first, j);
      last = j;
    }
  }
  return {f.grid.node(first), f.grid.node(last)};
}

/// Warn when the field's support comes within L/4 of the periodic seam.
inline void check_seam_distance(const Field& f, Diagnostics* diag) {
  if (diag == nullptr) return;
  const auto [lo, hi] = numerical_support(f);
  if (lo == 0.0 && hi == 0.0) return;
  const double quarter = 0.25 * f.grid.length();
  if (lo < quarter || hi > 3.0 * quarter) {
    std::ostringstream msg;
    msg << "support [" << lo << ", " << hi << "] lies within L/4 of the periodic seam; "
        << "wraparound of the nonlocal term is not negligible";
    diag->warnings.push_back(msg.str());
  }
}

/// I applied as the multiplier -a|xi|^{4/3} + i b xi|xi|^{1/3}.
inline Field apply_I_spectral(const Field& f, const SymbolTable& table, Diagnostics* diag = nullptr) {
  require_same_grid(f.grid, table.grid(), "apply_I_spectral");
  check_seam_distance(f, diag);
  Spectrum s = forward(f);
  const std::size_t nyq = f.grid.nyquist_slot();
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    complex m = table.nonlocal(j);
    if (j == nyq) m = m.real();
    s.coeffs[j] *= m;
  }
  return inverse(s);
}

}  // namespace fowler
