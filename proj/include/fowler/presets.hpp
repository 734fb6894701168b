#pragma once

#include "fowler/nonlocal.hpp"

#include <cmath>

namespace fowler {

/// Initial dune exp(-1/(1 - (x - L/2)^2)) on (L/2 - 1, L/2 + 1), zero elsewhere.
inline SmoothProfile dune_profile(double length = 30.0) { return SmoothProfile::bump(0.5 * length, 1.0, 1.0); }

/// Viscous Burgers travelling wave for eps = 1: (1/2)[1 - tanh((x - t/2)/4)].
inline double burgers_travelling_wave(double t, double x) { return 0.5 * (1.0 - std::tanh(0.25 * (x - 0.5 * t))); }

}  // namespace fowler
