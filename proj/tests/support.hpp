#pragma once

#include "fowler/grid.hpp"
#include "fowler/nonlocal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace fowler::testing {

/// Real field with random Fourier modes 1..kmax (amplitude ~ 1/k) and zero mean unless `mean` is set.
inline Field band_limited(const Grid& g, std::mt19937& rng, long kmax, double mean = 0.0) {
  std::normal_distribution<double> gauss;
  std::vector<double> amp, phase;
  std::uniform_real_distribution<double> unit(0.0, 2.0 * std::numbers::pi);
  for (long k = 1; k <= kmax; ++k) {
    amp.push_back(gauss(rng) / static_cast<double>(k));
    phase.push_back(unit(rng));
  }
  return sample(g, [&](double x) {
    double v = mean;
    for (long k = 1; k <= kmax; ++k) {
      v += amp[k - 1] * std::cos(2.0 * std::numbers::pi * k * x / g.length() + phase[k - 1]);
    }
    return v;
  });
}

inline double rel_l2(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    num += (a.values[j] - b.values[j]) * (a.values[j] - b.values[j]);
    den += b.values[j] * b.values[j];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) m = std::max(m, std::abs(a.values[j] - b.values[j]));
  return m;
}

/// Bump with random centre, radius and amplitude inside [lo, hi].
inline SmoothProfile random_bump(std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> radius(0.5, 2.0), amp(0.2, 2.0);
  const double r = radius(rng);
  std::uniform_real_distribution<double> centre(lo + r, hi - r);
  return SmoothProfile::bump(centre(rng), r, amp(rng));
}

}  // namespace fowler::testing
