#include <gtest/gtest.h>

#include "oectmc/sweep.hpp"

using namespace oectmc;

TEST(Sweep, DistanceGridCardinality) {
  auto spec = default_sweep(SweepAxis::Distance);
  spec.schemes = {Scheme::MoSK, Scheme::CSK4, Scheme::Hybrid};
  spec.ctrl_modes = {true, false};
  const auto pts = expand_points(Scenario{}, spec);
  ASSERT_EQ(pts.size(), 10u);
  EXPECT_DOUBLE_EQ(pts.front().r, 25e-6);
  EXPECT_DOUBLE_EQ(pts.back().r, 130e-6);
  EXPECT_EQ(pts.size() * spec.schemes.size() * spec.ctrl_modes.size(), 60u);
}

TEST(Sweep, SymbolPeriodDefaults) {
  const auto spec = default_sweep(SweepAxis::SymbolPeriod);
  EXPECT_EQ(spec.values, (std::vector<double>{36.5, 73.0, 109.5, 146.0, 219.0}));
  EXPECT_EQ(spec.isi_modes, (std::vector<bool>{true, false}));
  ASSERT_TRUE(spec.N_m.has_value());
  EXPECT_EQ(*spec.N_m, 2e4);
  for (const auto& p : expand_points(Scenario{}, spec)) {
    EXPECT_EQ(p.scenario.modulation.N_m, 2e4);
    EXPECT_EQ(p.T_s, p.value);
  }
}

TEST(Sweep, DeviceGridIsTenByTen) {
  const auto spec = default_sweep(SweepAxis::Device);
  const auto pts = expand_points(Scenario{}, spec);
  ASSERT_EQ(pts.size(), 100u);
  EXPECT_NEAR(pts.front().scenario.device.g_m, 1e-3, 1e-15);
  EXPECT_NEAR(pts.back().scenario.device.C_tot, 100e-9, 1e-20);
}

TEST(Sweep, DiffusionScaleKeepsSymbolPeriod) {
  const auto pts = expand_points(Scenario{}, default_sweep(SweepAxis::DiffusionScale));
  for (const auto& p : pts) {
    ASSERT_TRUE(p.T_s.has_value());
    EXPECT_NEAR(*p.T_s, 36.5, 1e-9);
    EXPECT_NEAR(p.scenario.species[0].D, 4.9e-10 * p.value, 1e-22);
  }
}

TEST(Sweep, InvalidPointsAreRejected) {
  SweepSpec spec = default_sweep(SweepAxis::Rho);
  spec.values = {1.5};
  EXPECT_THROW(expand_points(Scenario{}, spec), ScenarioError);
  EXPECT_THROW(parse_axis("wavelength"), SweepError);
  spec.values.clear();
  EXPECT_THROW(run_sweep(Scenario{}, spec), SweepError);
}

TEST(Sweep, RowsCarryAxisValues) {
  Scenario sc;
  sc.montecarlo.n_cal = 50;
  sc.montecarlo.symbols_per_seed = 100;
  sc.montecarlo.min_seeds = 1;
  sc.montecarlo.max_seeds = 1;
  SweepSpec spec = default_sweep(SweepAxis::Rho);
  spec.values = {0.2, 0.8};
  spec.ctrl_modes = {true, false};
  int seen = 0;
  const auto rows = run_sweep(sc, spec, [&](const ResultRow&) { ++seen; });
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(seen, 4);
  EXPECT_EQ(rows[0].axis, "rho");
  EXPECT_EQ(*rows[0].axis_value, 0.2);
  EXPECT_TRUE(rows[0].ctrl);
  EXPECT_FALSE(rows[1].ctrl);
  EXPECT_EQ(*rows[3].axis_value, 0.8);
  EXPECT_EQ(rows[0].symbols, 100);
}
