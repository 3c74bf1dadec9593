#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "dftlim/errors.hpp"
#include "dftlim/gamma.hpp"
#include "dftlim/gb.hpp"

using namespace dftlim;

namespace {
std::shared_ptr<const LInterp> interp_tf_d(int nodes = 1024) {
  std::vector<double> ts;
  for (int i = 0; i < 16; ++i)
    ts.push_back(5e-3 * std::pow(400.0, double(i) / 15));
  for (double t : {0.5, 0.7, 1.0}) ts.push_back(t);
  return build_l_interp("", "tf_d", 5.0 / 3.0, 1e-6, 40.0, nodes, ts);
}
}  // namespace

TEST_CASE("single-nucleus collapse: rescaled energy is epsilon-independent") {
  const auto li = interp_tf_d();
  const GbEvaluator ev("tf_d", 1.0, 1.0, 5.0 / 3.0, li);
  const std::vector<double> ladder{1.0, 0.5, 0.1, 0.01};
  const CollapseReport rep =
      single_nucleus_collapse(ev, 0.7, ladder, 1e-6, 40.0, 1024);
  REQUIRE(rep.rows.size() == ladder.size());
  CHECK(rep.constant_ok);
  CHECK(rep.max_rel_spread <= 1e-6);
  // The eps = 1 value matches the tabulated cell energy (0.7 is an exact
  // abscissa of the table, so no interpolation error enters).
  CHECK(rep.reference_ok);
  CHECK(rep.reference == doctest::Approx(ev.value(0.7)).epsilon(1e-12));
  // Mass concentrates: nothing outside radius 10 eps ell.
  CHECK(rep.concentration_ok);
  for (const auto& row : rep.rows)
    CHECK(row.mass_outside <= 1e-3 * 0.7);
}

TEST_CASE("collapse rows equal independent epsilon-level solves") {
  const auto li = interp_tf_d();
  const GbEvaluator ev("tf_d", 1.0, 1.0, 5.0 / 3.0, li);
  const std::vector<double> ladder{0.1, 0.01};
  const CollapseReport rep =
      single_nucleus_collapse(ev, 0.7, ladder, 1e-6, 40.0, 1024);
  const Model m = make_model("tf_d", 1.0, 1.0);
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double direct =
        direct_epsilon_solve(m, ladder[i], 0.7, 1e-6, 40.0, 1024);
    CHECK(std::abs(rep.rows[i].g_eps - direct) / std::abs(direct) <= 1e-8);
  }
}

TEST_CASE("two-nucleus recovery: exact first-order gap structure") {
  NucleiConfig cfg;
  cfg.family = "tf_d";
  cfg.Z = {1.0, 2.0};
  cfg.X = {{{0.0, 0.0, 0.0}}, {{5.0, 0.0, 0.0}}};
  cfg.m = 3.0;
  RecoverySequenceSpec spec;
  spec.config = cfg;
  spec.alpha = {1.0, 2.0};  // both nuclei exactly neutral
  spec.eps_ladder = {0.4, 0.2, 0.1, 0.05};
  spec.r_min = 1e-6;
  spec.r_max = 40.0;
  spec.nodes = 1024;
  const auto li = interp_tf_d();
  std::vector<GbEvaluator> evs;
  evs.emplace_back("tf_d", 1.0, 1.0, 5.0 / 3.0, li);
  evs.emplace_back("tf_d", 1.0, 2.0, 5.0 / 3.0, li);
  const EpsilonReport rep = recovery_energy(spec, &evs);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.mass_conserved);
  CHECK(rep.gaps_decreasing);
  CHECK(rep.slope_meaningful);
  // With carriers of masses (1, 2) at distance 5 the order-eps coefficient
  // is b c_corr (2 m1 m2 / d) - (Z1 m2 + Z2 m1)/d = 0.4 - 0.8 = -0.4, so
  // gap(eps) = -0.4 eps exactly and the fitted slope is 1. (The coefficient
  // is stationary in the carrier masses at the neutral point, so the
  // discrete-mass error enters only quadratically.)
  CHECK(rep.fitted_slope == doctest::Approx(1.0).epsilon(1e-3));
  const double m1 = rep.carriers[0].mass, m2 = rep.carriers[1].mass;
  for (const auto& row : rep.rows) {
    CHECK(row.gap < 0.0);
    CHECK(row.gap / row.eps == doctest::Approx(-0.4).epsilon(1e-3));
    CHECK(row.within_corridor);
    // Shell-theorem bookkeeping on the measured masses is exact.
    CHECK(row.cross_attraction ==
          doctest::Approx(row.eps * (1.0 * m2 + 2.0 * m1) / 5.0)
              .epsilon(1e-12));
    CHECK(row.cross_correlation ==
          doctest::Approx(row.eps * 0.5 * 2.0 * m1 * m2 / 5.0)
              .epsilon(1e-12));
  }
  // The first-order structure makes gap/eps a constant across the ladder.
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].gap / rep.rows[i].eps ==
          doctest::Approx(rep.rows[0].gap / rep.rows[0].eps).epsilon(1e-9));
  // Table reference and discrete-carrier reference agree to table accuracy.
  CHECK(std::isfinite(rep.reference_table));
  CHECK(std::abs(rep.reference - rep.reference_table) /
            std::abs(rep.reference) <=
        1e-3);
  // Carrier bookkeeping.
  REQUIRE(rep.carriers.size() == 2);
  CHECK(rep.carriers[0].mass == doctest::Approx(1.0).epsilon(2e-2));
  CHECK(rep.carriers[1].mass == doctest::Approx(2.0).epsilon(2e-2));
  CHECK(rep.background_mass == 0.0);
}

TEST_CASE("recovery with a smooth background adds a second-order term") {
  NucleiConfig cfg;
  cfg.family = "tf_d";
  cfg.Z = {1.0, 2.0};
  cfg.X = {{{-3.0, 0.0, 0.0}}, {{3.0, 0.0, 0.0}}};
  cfg.m = 3.0;
  RecoverySequenceSpec spec;
  spec.config = cfg;
  spec.alpha = {1.0, 2.0};
  spec.eps_ladder = {0.2, 0.1, 0.05, 0.025};
  spec.r_min = 1e-6;
  spec.r_max = 40.0;
  spec.nodes = 1024;
  spec.with_background = true;
  spec.background_mass = 0.5;
  const EpsilonReport rep = recovery_energy(spec, nullptr);
  CHECK(rep.background_mass == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_FALSE(std::isfinite(rep.reference_table));  // no evaluators given
  CHECK(rep.mass_conserved);
  CHECK(rep.slope_meaningful);
  // gap = eps K + eps^2 T_bg: the linear term dominates on this ladder.
  CHECK(rep.fitted_slope == doctest::Approx(1.0).epsilon(0.2));
  for (const auto& row : rep.rows) CHECK(row.within_corridor);
}

TEST_CASE("single-carrier recovery has no cross terms and no slope") {
  NucleiConfig cfg;
  cfg.family = "tf_d";
  cfg.Z = {1.5};
  cfg.X = {{{0.0, 0.0, 0.0}}};
  cfg.m = 1.0;
  RecoverySequenceSpec spec;
  spec.config = cfg;
  spec.alpha = {1.0};
  spec.eps_ladder = {0.5, 0.25, 0.125};
  spec.r_min = 1e-6;
  spec.r_max = 40.0;
  spec.nodes = 768;
  const EpsilonReport rep = recovery_energy(spec, nullptr);
  for (const auto& row : rep.rows) {
    CHECK(row.cross_attraction == 0.0);
    CHECK(row.cross_correlation == 0.0);
    CHECK(std::abs(row.gap) <= 1e-9 * std::abs(rep.reference));
  }
  CHECK_FALSE(rep.slope_meaningful);
}

TEST_CASE("default ladder halves six times from the overlap-safe start") {
  NucleiConfig cfg;
  cfg.family = "tf_d";
  cfg.Z = {1.0, 1.0};
  cfg.X = {{{0.0, 0.0, 0.0}}, {{6.0, 0.0, 0.0}}};
  cfg.m = 2.0;
  RecoverySequenceSpec spec;
  spec.config = cfg;
  spec.alpha = {1.0, 1.0};
  spec.r_min = 1e-6;
  spec.r_max = 40.0;
  spec.nodes = 768;
  const EpsilonReport rep = recovery_energy(spec, nullptr);
  REQUIRE(rep.rows.size() == 6);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].eps == doctest::Approx(0.5 * rep.rows[i - 1].eps));
}

TEST_CASE("overlapping carriers are a numerical failure") {
  NucleiConfig cfg;
  cfg.family = "tf_d";
  cfg.Z = {1.0, 2.0};
  cfg.X = {{{0.0, 0.0, 0.0}}, {{1.0, 0.0, 0.0}}};  // too close for eps = 1
  cfg.m = 3.0;
  RecoverySequenceSpec spec;
  spec.config = cfg;
  spec.alpha = {1.0, 2.0};
  spec.eps_ladder = {1.0};
  spec.r_min = 1e-6;
  spec.r_max = 40.0;
  spec.nodes = 768;
  CHECK_THROWS_AS(recovery_energy(spec, nullptr), NumericalError);
}
