#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace fowler::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod (15/31) on a finite interval.
///
/// Boost reports |K31 - G15|, the error of the embedded Gauss rule. The
/// returned estimate applies the QUADPACK scaling err * min(1, (200 err / |f|_1)^{3/2}),
/// which tracks the error of the Kronrod value actually returned.
template <class F>
Result adaptive(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 15) {
  if (a == b) return {};
  double err = 0.0, l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err, &l1);
  if (l1 > 0.0) err *= std::min(1.0, std::pow(200.0 * err / l1, 1.5));
  return {v, err};
}

/// Adaptive Gauss-Kronrod over [a, b] split into panels no longer than
/// `panel`; used for oscillatory integrands.
template <class F>
Result panels(F&& f, double a, double b, double panel, double rel_tol = 1e-13) {
  Result total;
  if (!(b > a)) return total;
  const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / panel)));
  const double h = (b - a) / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double lo = a + static_cast<double>(i) * h;
    const double hi = (i + 1 == count) ? b : lo + h;
    const Result r = adaptive(f, lo, hi, rel_tol);
    total.value += r.value;
    total.error += r.error;
  }
  return total;
}

/// Double-exponential rule; tolerates integrable endpoint singularities.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double tol = 1e-14) {
  boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  const double v = rule.integrate(f, a, b, tol, &err);
  return {v, err};
}

}  // namespace fowler::quad
