#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "dftlim/errors.hpp"
#include "dftlim/gb.hpp"
#include "dftlim/ltable.hpp"

using namespace dftlim;

namespace {
std::vector<double> abscissae(std::initializer_list<double> extra) {
  std::vector<double> ts;
  for (int i = 0; i < 12; ++i)
    ts.push_back(0.01 * std::pow(200.0, double(i) / 11));
  for (double t : extra) ts.push_back(t);
  return ts;
}

std::shared_ptr<const LInterp> interp_for(const char* family, double beta,
                                          std::initializer_list<double> extra,
                                          int nodes = 1024) {
  return build_l_interp("", family, beta, 1e-6, 40.0, nodes,
                        abscissae(extra));
}
}  // namespace

TEST_CASE("evaluator basics: zero mass, shape, free functions") {
  const auto li = interp_for("tf_d", 5.0 / 3.0, {0.5, 0.7, 1.0});
  const GbEvaluator ev("tf_d", 1.0, 1.0, 5.0 / 3.0, li);
  CHECK(ev.value(0.0) == 0.0);
  CHECK(ev.value(0.5) < 0.0);
  // more mass never raises the energy; curve is convex (derivative rises)
  CHECK(ev.value(0.7) <= ev.value(0.5));
  CHECK(ev.derivative(0.5) <= 0.0);
  CHECK(ev.derivative(0.7) >= ev.derivative(0.5) - 1e-9);
  CHECK(gb(ev, 0.5) == ev.value(0.5));
  CHECK(gb_derivative(ev, 0.5) == ev.derivative(0.5));
  CHECK_THROWS_AS(ev.derivative(0.0), ConfigError);
  CHECK_THROWS_AS(ev.value(-0.1), ConfigError);
  // identity scales
  CHECK(ev.energy_scale() == doctest::Approx(1.0));
  CHECK(ev.mass_scale() == doctest::Approx(1.0));
  CHECK(ev.saturation_alpha() == doctest::Approx(1.0));
}

TEST_CASE("evaluator validates the wrapped table") {
  const auto li = interp_for("tf_c0", 5.0 / 3.0, {});
  CHECK_THROWS_AS(GbEvaluator("tf_d", 1.0, 1.0, 5.0 / 3.0, li), ConfigError);
  CHECK_THROWS_AS(GbEvaluator("tf_c0", 1.0, 1.0, 5.0 / 3.0, nullptr),
                  ConfigError);
}

TEST_CASE("rescaling against direct solves: pointwise-kinetic families") {
  // Identity (b = Z = 1) at an exact abscissa: the direct solve is the very
  // computation that produced the table row.
  {
    const auto li = interp_for("tf_d", 5.0 / 3.0, {0.5, 0.7, 1.0});
    const GbEvaluator ev("tf_d", 1.0, 1.0, 5.0 / 3.0, li);
    const ScalingCheck c = verify_scaling(ev, 0.7, 1e-6, 40.0, 1024);
    CHECK(c.gap <= 1e-6);
  }
  // (b, Z) = (1, 2): energy scale 2^{7/3}, mass scale 1/2 for tf_d.
  {
    const auto li = interp_for("tf_d", 5.0 / 3.0, {0.35, 0.5});
    const GbEvaluator ev("tf_d", 1.0, 2.0, 5.0 / 3.0, li);
    CHECK(ev.energy_scale() == doctest::Approx(std::pow(2.0, 7.0 / 3.0)));
    CHECK(ev.mass_scale() == doctest::Approx(0.5));
    CHECK(ev.saturation_alpha() == doctest::Approx(2.0));  // Z/b
    const ScalingCheck c = verify_scaling(ev, 0.7, 1e-6, 40.0, 1024);
    CHECK(c.gap <= 1e-3);
  }
  // tf_c0 at (b, Z) = (1, 2): mass scale 1/8, alpha = 1 probes L(1/8).
  {
    const auto li = interp_for("tf_c0", 5.0 / 3.0, {0.125});
    const GbEvaluator ev("tf_c0", 1.0, 2.0, 5.0 / 3.0, li);
    CHECK(ev.energy_scale() == doctest::Approx(8.0));
    CHECK(ev.mass_scale() == doctest::Approx(0.125));
    const ScalingCheck c = verify_scaling(ev, 1.0, 1e-6, 40.0, 1024);
    CHECK(c.gap <= 1e-3);
  }
}

TEST_CASE("rescaling against direct solves: gradient-kinetic families") {
  {
    const auto li = interp_for("vw_d", 2.0, {0.5}, 640);
    const GbEvaluator ev("vw_d", 1.0, 2.0, 2.0, li);
    CHECK(ev.energy_scale() == doctest::Approx(std::pow(2.0, 3.0)));
    CHECK(ev.mass_scale() == doctest::Approx(0.5));
    const ScalingCheck c = verify_scaling(ev, 1.0, 1e-6, 40.0, 640);
    CHECK(c.gap <= 5e-3);
  }
  {
    const auto li = interp_for("vw_c0", 5.0 / 3.0, {0.125}, 640);
    const GbEvaluator ev("vw_c0", 1.0, 2.0, 5.0 / 3.0, li);
    const ScalingCheck c = verify_scaling(ev, 1.0, 1e-6, 40.0, 640);
    CHECK(c.gap <= 5e-3);
  }
}

TEST_CASE("water-filling inverse round-trips through the derivative") {
  const auto li = interp_for("tf_d", 5.0 / 3.0, {0.5, 0.7, 1.0});
  const GbEvaluator ev("tf_d", 2.0, 3.0, 5.0 / 3.0, li);
  CHECK(ev.saturation_alpha() == doctest::Approx(1.5));  // Z/b = 3/2
  for (double a : {0.3, 0.8, 1.2}) {
    const double s = ev.derivative(a);
    if (s < -1e-9)
      CHECK(ev.alpha_for_slope(s) == doctest::Approx(a).epsilon(1e-5));
  }
  CHECK(ev.alpha_for_slope(0.0) == doctest::Approx(1.5));
  CHECK(ev.alpha_max_covered() > 0.0);
}

TEST_CASE("audit failures surface as numerical errors in build_l_interp") {
  SolveOptions starved;
  starved.max_bisect = 2;
  starved.max_scf = 2;
  CHECK_THROWS_AS(build_l_interp("", "tf_d", 5.0 / 3.0, 1e-6, 30.0, 512,
                                 abscissae({}), starved),
                  NumericalError);
}
