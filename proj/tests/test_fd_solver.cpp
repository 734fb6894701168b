#include "fowler/fd_solver.hpp"
#include "fowler/nonlocal.hpp"
#include "fowler/presets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace fowler;

namespace {

std::vector<double> dune_on(const FdState& s) {
  const auto p = dune_profile(30.0);
  std::vector<double> u(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) u[i] = p(s.node(i)).value;
  return u;
}

FdConfig dune_config(FdModel model, double t_end) {
  FdConfig c;
  c.model = model;
  c.t_end = t_end;
  c.snapshot_interval = t_end;
  return c;
}

std::vector<double> dune_initial(const FdConfig& c) {
  return dune_on(make_fd_state(c.length, c.points, c.eps, c.x0));
}

// The unit-time Fowler dune run is shared by several tests.
const FdReport& fowler_dune() {
  static const FdReport r = [] {
    const auto c = dune_config(FdModel::Fowler, 1.0);
    return run_fd(c, dune_initial(c));
  }();
  return r;
}

TEST(Cfl, ZeroFieldUsesViscousLimit) {
  FdState s = make_fd_state(1.0, 11, 0.1);
  EXPECT_DOUBLE_EQ(s.dx, 0.1);
  EXPECT_DOUBLE_EQ(cfl_dt(s), 0.05);
}

TEST(Cfl, PaperMesh) {
  FdState s = make_fd_state(30.0, 4001, 0.1);
  EXPECT_DOUBLE_EQ(s.dx, 0.0075);
  s.u[100] = 1.0;
  EXPECT_NEAR(cfl_dt(s), 2.8125e-4, 1e-18);
}

TEST(Cfl, DoublingViscosityHalvesViscousTerm) {
  const FdState a = make_fd_state(30.0, 401, 0.1), b = make_fd_state(30.0, 401, 0.2);
  EXPECT_DOUBLE_EQ(cfl_dt(b), 0.5 * cfl_dt(a));
}

TEST(Burgers, ConstantInteriorUnchanged) {
  FdState s = make_fd_state(10.0, 101, 0.3);
  std::fill(s.u.begin(), s.u.end(), 0.8);
  FdStepOptions opt;
  opt.boundary.left = [](double) { return 0.8; };
  opt.boundary.right = [](double) { return 0.8; };
  const FdState n = step_burgers(s, cfl_dt(s), opt);
  for (double v : n.u) EXPECT_DOUBLE_EQ(v, 0.8);
}

TEST(Burgers, BoundariesHeldAtZero) {
  FdState s = make_fd_state(30.0, 301, 0.1);
  s.u = dune_on(s);
  const FdState n = step_burgers(s, cfl_dt(s));
  EXPECT_EQ(n.u.front(), 0.0);
  EXPECT_EQ(n.u.back(), 0.0);
}

TEST(Burgers, TravellingWave) {
  FdConfig c;
  c.model = FdModel::Burgers;
  c.x0 = -15.0;
  c.eps = 1.0;
  c.t_end = 1.0;
  c.snapshot_interval = 0.5;
  c.exact = burgers_travelling_wave;
  c.step.boundary.left = [](double t) { return burgers_travelling_wave(t, -15.0); };
  c.step.boundary.right = [](double t) { return burgers_travelling_wave(t, 15.0); };
  std::vector<double> u0(c.points);
  const FdState mesh = make_fd_state(c.length, c.points, c.eps, c.x0);
  for (std::size_t i = 0; i < c.points; ++i) u0[i] = burgers_travelling_wave(0.0, mesh.node(i));
  const auto r = run_fd(c, u0);
  EXPECT_FALSE(r.blew_up);
  EXPECT_LE(r.max_error, 5e-4);
  EXPECT_GT(r.max_error, 0.0);
}

TEST(Burgers, MaximumPrincipleOnDune) {
  const auto c = dune_config(FdModel::Burgers, 5.0);
  const auto u0 = dune_initial(c);
  const auto r = run_fd(c, u0);
  EXPECT_GE(r.run_min, -1e-12);
  EXPECT_LE(r.run_max, *std::max_element(u0.begin(), u0.end()) + 1e-12);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Burgers, CflViolation) {
  FdState s = make_fd_state(30.0, 401, 0.1);
  s.u = dune_on(s);
  std::vector<std::string> warnings;
  step_burgers(s, 10.0 * cfl_dt(s), {}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  FdStepOptions strict;
  strict.strict = true;
  EXPECT_THROW(step_burgers(s, 10.0 * cfl_dt(s), strict), NumericalError);
  EXPECT_NO_THROW(step_burgers(s, cfl_dt(s), strict));
}

TEST(NonlocalSum, ZeroField) {
  const FdState s = make_fd_state(30.0, 101, 0.1);
  for (std::size_t i = 1; i < 100; ++i) EXPECT_EQ(nonlocal_sum(s, i), 0.0);
}

TEST(NonlocalSum, IndexRange) {
  const FdState s = make_fd_state(30.0, 101, 0.1);
  EXPECT_THROW(nonlocal_sum(s, 0), std::out_of_range);
  EXPECT_THROW(nonlocal_sum(s, 100), std::out_of_range);
  EXPECT_NO_THROW(nonlocal_sum(s, 99));
}

TEST(NonlocalSum, SeesOnlyUpstream) {
  FdState s = make_fd_state(30.0, 601, 0.1);
  s.u = dune_on(s);
  // The dune occupies (14, 16); every node left of 14 - dx sees nothing.
  for (std::size_t i = 1; s.node(i + 1) < 14.0; ++i) EXPECT_EQ(nonlocal_sum(s, i), 0.0);
}

TEST(NonlocalSum, MatchesFluxVector) {
  FdState s = make_fd_state(30.0, 401, 0.1);
  s.u = dune_on(s);
  const auto flux = nonlocal_flux(s);
  for (std::size_t i : {150u, 201u, 260u, 399u}) EXPECT_NEAR(flux[i], nonlocal_sum(s, i), 1e-13);
}

TEST(NonlocalSum, ConvergesToDefinition) {
  const auto p = dune_profile(30.0);
  const double x = 16.5;
  const double exact = apply_L_definition(p, x);
  std::vector<double> errors;
  for (std::size_t m : {1201u, 2401u, 4801u, 9601u}) {
    FdState s = make_fd_state(30.0, m, 0.1);
    s.u = dune_on(s);
    const auto i = static_cast<std::size_t>(std::lround(x / s.dx));
    errors.push_back(std::abs(nonlocal_sum(s, i) - exact));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) EXPECT_GE(errors[k - 1] / errors[k], 1.5) << "level " << k;
}

TEST(NonlocalSum, Variants) {
  FdState s = make_fd_state(30.0, 401, 0.1);
  s.u = dune_on(s);
  const std::size_t i = 210;
  NonlocalSumOptions skip;
  skip.zero_weight = ZeroWeight::Skip;
  NonlocalSumOptions unweighted;
  unweighted.riemann_weight = false;
  const double base = nonlocal_sum(s, i);
  EXPECT_NEAR(nonlocal_sum(s, i, unweighted) * s.dx, base, 1e-12 * std::abs(base));
  const double d = (s.u[i + 1] - s.u[i - 1]) / (2.0 * s.dx);
  EXPECT_NEAR(base - nonlocal_sum(s, i, skip), s.dx * 1.5 * std::pow(s.dx, -1.0 / 3.0) * d, 1e-12);
}

TEST(Fowler, ZeroStaysZero) {
  const FdState s = make_fd_state(30.0, 201, 0.1);
  const FdState n = step_fowler(s, cfl_dt(s));
  for (double v : n.u) EXPECT_EQ(v, 0.0);
}

TEST(Fowler, DuneErodes) {
  const auto& r = fowler_dune();
  EXPECT_FALSE(r.blew_up);
  EXPECT_LT(r.run_min, 0.0);
  EXPECT_GT(r.diagnostics.back().argmin, 16.0);
}

TEST(Fowler, MassDriftOverRun) {
  const auto& r = fowler_dune();
  const double m0 = r.diagnostics.front().mass;
  EXPECT_LE(std::abs(r.diagnostics.back().mass - m0) / m0, 1e-3);
}

TEST(Fowler, MassBudgetClosesWithBoundaryFlux) {
  // Flux form: the interior mass changes only through the fluxes at the two ends.
  FdState s = make_fd_state(30.0, 801, 0.1);
  s.u = dune_on(s);
  const double dt = cfl_dt(s);
  const auto flux = nonlocal_flux(s);
  const FdState n = step_fowler(s, dt);
  const std::size_t m = s.size();
  const double dx = s.dx;
  auto sq = [](double v) { return v * v; };
  const double boundary =
      -(sq(s.u[m - 1]) + sq(s.u[m - 2]) - sq(s.u[0]) - sq(s.u[1])) / 4.0 -
      (flux[m - 1] + flux[m - 2] - flux[0] - flux[1]) / 2.0 +
      s.eps * ((s.u[m - 1] - s.u[m - 2]) - (s.u[1] - s.u[0])) / dx;
  double before = 0.0, after = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    before += s.u[i];
    after += n.u[i];
  }
  EXPECT_NEAR((after - before) * dx, dt * boundary, 1e-15);
}

TEST(RunFd, LandsOnSnapshotTimes) {
  auto c = dune_config(FdModel::Burgers, 0.3);
  c.points = 401;
  c.snapshot_interval = 0.1;
  const auto r = run_fd(c, dune_initial(c));
  ASSERT_EQ(r.snapshots.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(r.snapshots[k].t, 0.1 * static_cast<double>(k), 1e-15);
}

TEST(RunFd, RejectsBadConfig) {
  auto c = dune_config(FdModel::Burgers, 0.3);
  EXPECT_THROW(run_fd(c, std::vector<double>(10)), ConfigError);
  c.t_end = -1.0;
  EXPECT_THROW(run_fd(c, dune_initial(c)), ConfigError);
}

TEST(RunFd, UnstableStepReportsBlowUp) {
  auto c = dune_config(FdModel::Burgers, 50.0);
  c.points = 201;
  c.dt = 40.0 * cfl_dt(make_fd_state(30.0, 201, 0.1));
  c.snapshot_interval = 50.0;
  const auto r = run_fd(c, dune_initial(c));
  EXPECT_TRUE(r.blew_up);
  EXPECT_FALSE(r.warnings.empty());
}

}  // namespace
