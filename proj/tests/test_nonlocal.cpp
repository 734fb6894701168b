#include "fowler/nonlocal.hpp"
#include "fowler/symbol.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fowler;

namespace {

constexpr double kPi = std::numbers::pi;

// Large periodic box so that wraparound of the nonlocal tail stays below 1e-4.
const Grid& wide_grid() {
  static const Grid g(64.0, 32768);
  return g;
}

const SymbolTable& wide_table() {
  static const SymbolTable t(wide_grid());
  return t;
}

double spectral_at(const Field& f, double x) {
  const Field out = apply_I_spectral(f, wide_table());
  return out.values[out.grid.nearest_node(x)];
}

SmoothProfile constant_profile(double c) { return SmoothProfile::affine(0.0, c, -5.0, 5.0); }

TEST(Profiles, DerivativesConsistent) {
  const std::vector<double> pts{-1.3, -0.4, 0.0, 0.2, 0.77};
  EXPECT_LT(derivative_consistency(SmoothProfile::gaussian(0.0, 1.0, 1.0), pts), 1e-5);
  EXPECT_LT(derivative_consistency(SmoothProfile::bump(0.0, 1.5, 2.0), pts), 1e-5);
}

TEST(Definition, ConstantGivesZero) {
  const auto p = constant_profile(3.0);
  for (double x : {-7.0, -1.0, 0.0, 4.0}) {
    EXPECT_NEAR(apply_I_definition(p, x), 0.0, 1e-12);
    EXPECT_NEAR(apply_L_definition(p, x), 0.0, 1e-12);
  }
}

TEST(Definition, AffineGivesZero) {
  const auto p = SmoothProfile::affine(0.7, -1.0, -5.0, 5.0);
  for (double x : {-6.0, 0.0, 2.5}) EXPECT_NEAR(apply_I_definition(p, x), 0.0, 1e-12);
}

TEST(Definition, GaussianAtZeroClosedForm) {
  // \int_0^inf z^{-1/3} (4z^2 - 2) e^{-z^2} dz = 2 Gamma(4/3) - Gamma(1/3) = -Gamma(1/3)/3.
  const auto g = SmoothProfile::gaussian();
  EXPECT_NEAR(apply_I_definition(g, 0.0), -std::tgamma(1.0 / 3.0) / 3.0, 1e-9);
}

TEST(Definition, LOfGaussianAtZero) {
  // \int_0^inf z^{-1/3} 2z e^{-z^2} dz = Gamma(5/6).
  EXPECT_NEAR(apply_L_definition(SmoothProfile::gaussian(), 0.0), std::tgamma(5.0 / 6.0), 1e-8);
}

TEST(Definition, DerivativeOfLIsI) {
  const auto p = SmoothProfile::bump(0.0, 1.2, 1.0);
  const double h = 1e-4;
  for (double x : {-0.5, 0.1, 0.9, 1.5, 3.0}) {
    const double dl = (apply_L_definition(p, x + h) - apply_L_definition(p, x - h)) / (2.0 * h);
    EXPECT_NEAR(dl, apply_I_definition(p, x), 1e-5) << "x = " << x;
  }
}

TEST(Definition, LRejectsSlopedTail) {
  EXPECT_THROW(apply_L_definition(SmoothProfile::affine(1.0, 0.0, -1.0, 1.0), 0.0), std::invalid_argument);
}

TEST(Formula, ConstantGivesZero) {
  const auto p = constant_profile(-2.0);
  for (double x : {-7.0, 0.0, 4.0}) EXPECT_NEAR(apply_I_formula(p, x), 0.0, 1e-12);
}

TEST(Formula, AffineGivesZero) {
  const auto p = SmoothProfile::affine(-1.5, 0.25, -3.0, 3.0);
  for (double x : {-4.0, -1.0, 2.0}) EXPECT_NEAR(apply_I_formula(p, x), 0.0, 1e-12);
}

TEST(Formula, GaussianMatchesDefinition) {
  const auto g = SmoothProfile::gaussian();
  EXPECT_NEAR(apply_I_formula(g, 0.0), apply_I_definition(g, 0.0), 1e-6);
}

TEST(Formula, ConvexProfileIsNonNegative) {
  // x^2 on [-2, 2], continued by its tangent on the left: convex wherever the integral looks.
  const SmoothProfile p([](double x) { return ProfileSample{x * x, 2.0 * x, 2.0}; }, -2.0, 2.0, true);
  for (double x : {-1.5, 0.0, 1.0, 2.0}) EXPECT_GE(apply_I_formula(p, x), 0.0) << "x = " << x;
}

TEST(Spectral, ConstantGivesZero) {
  const Grid g(30.0, 256);
  const SymbolTable t(g);
  const Field out = apply_I_spectral(sample(g, [](double) { return 4.0; }), t);
  for (double v : out.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Spectral, SingleModeMultiplier) {
  const Grid g(30.0, 256);
  const SymbolTable t(g);
  const long m = 7;
  const double xi = m / 30.0;
  const Field f = sample(g, [&](double x) { return std::cos(2.0 * kPi * xi * x); });
  const Field out = apply_I_spectral(f, t);
  const double s = std::pow(xi, 4.0 / 3.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.node(j);
    const double expect = -t.a() * s * std::cos(2.0 * kPi * xi * x) - t.b() * s * std::sin(2.0 * kPi * xi * x);
    EXPECT_NEAR(out.values[j], expect, 1e-10);
  }
}

TEST(Spectral, CosineAgreesWithFormula) {
  // A long cosine window: away from the window edges the formula sees an (almost) periodic cosine.
  const double xi = 4.0 / 64.0;
  const auto cosine = [&](double x) {
    const double w = 2.0 * kPi * xi;
    return ProfileSample{std::cos(w * x), -w * std::sin(w * x), -w * w * std::cos(w * x)};
  };
  const SmoothProfile p(cosine, -1e4, 1e4);
  const auto& t = wide_table();
  const Field out = apply_I_spectral(sample(wide_grid(), [&](double x) { return cosine(x).value; }), t);
  for (double x : {10.0, 31.0, 50.0}) {
    const std::size_t j = wide_grid().nearest_node(x);
    EXPECT_NEAR(out.values[j], apply_I_formula(p, wide_grid().node(j)), 1e-4);
  }
}

TEST(Spectral, BumpAgreesWithFormula) {
  const auto p = SmoothProfile::bump(32.0, 1.0, 1.0);
  const Field f = sample(wide_grid(), [&](double x) { return p(x).value; });
  for (double x : {31.5, 32.0, 33.0, 35.0}) {
    const double node = wide_grid().node(wide_grid().nearest_node(x));
    EXPECT_NEAR(spectral_at(f, node), apply_I_formula(p, node), 1e-4);
  }
}

TEST(Spectral, RejectsForeignGrid) {
  const SymbolTable t(Grid(30.0, 64));
  EXPECT_THROW(apply_I_spectral(Field(Grid(30.0, 128)), t), std::invalid_argument);
}

TEST(Spectral, WarnsNearSeam) {
  const Grid g(30.0, 512);
  const SymbolTable t(g);
  Diagnostics diag;
  const auto p = SmoothProfile::bump(3.0, 1.0, 1.0);
  apply_I_spectral(sample(g, [&](double x) { return p(x).value; }), t, &diag);
  EXPECT_FALSE(diag.warnings.empty());
  Diagnostics quiet;
  const auto q = SmoothProfile::bump(15.0, 1.0, 1.0);
  apply_I_spectral(sample(g, [&](double x) { return q(x).value; }), t, &quiet);
  EXPECT_TRUE(quiet.warnings.empty());
}

TEST(RouteAgreement, RandomBumps) {
  std::mt19937 rng(2024);
  double worst_formula = 0.0, worst_spectral = 0.0;
  for (int b = 0; b < 5; ++b) {
    const auto p = fowler::testing::random_bump(rng, 26.0, 38.0);
    const Field f = sample(wide_grid(), [&](double x) { return p(x).value; });
    const Field spec = apply_I_spectral(f, wide_table());
    std::uniform_real_distribution<double> where(p.lo() - 1.0, p.hi() + 3.0);
    for (int i = 0; i < 10; ++i) {
      const double x = wide_grid().node(wide_grid().nearest_node(where(rng)));
      const double d = apply_I_definition(p, x);
      const double fo = apply_I_formula(p, x);
      worst_formula = std::max(worst_formula, std::abs(d - fo));
      worst_spectral = std::max(worst_spectral, std::abs(fo - spec.values[wide_grid().nearest_node(x)]));
    }
  }
  EXPECT_LE(worst_formula, 1e-6);
  EXPECT_LE(worst_spectral, 1e-4);
}

TEST(Sobolev, MultiplierBound) {
  // ||I phi||_{H^{s-4/3}} <= 4 pi^2 Gamma(2/3) ||phi||_{H^s}, weights (1 + 4 pi^2 xi^2)^{s}.
  std::mt19937 rng(9);
  const Grid g(30.0, 1024);
  const SymbolTable t(g);
  const double bound = 4.0 * kPi * kPi * std::tgamma(2.0 / 3.0);
  for (double s : {0.0, 1.0, 2.5}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Spectrum phi = forward(fowler::testing::band_limited(g, rng, 300));
      const Spectrum out = forward(apply_I_spectral(inverse(phi), t));
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = 1.0 + 4.0 * kPi * kPi * g.frequency(j) * g.frequency(j);
        lhs += std::pow(w, s - 4.0 / 3.0) * std::norm(out.coeffs[j]);
        rhs += std::pow(w, s) * std::norm(phi.coeffs[j]);
      }
      EXPECT_LE(std::sqrt(lhs), bound * std::sqrt(rhs));
    }
  }
}

}  // namespace
