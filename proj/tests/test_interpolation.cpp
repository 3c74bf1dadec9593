#include <doctest.h>

#include <cmath>
#include <vector>

#include "dftlim/errors.hpp"
#include "dftlim/interpolation.hpp"

using namespace dftlim;

TEST_CASE("pchip interpolates nodes exactly and preserves monotonicity") {
  const std::vector<double> x{0.0, 0.5, 1.0, 2.0, 4.0};
  const std::vector<double> y{0.0, 0.9, 1.0, 1.5, 1.6};
  const Pchip p = build_pchip(x, y);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(pchip_eval(p, x[i]) == doctest::Approx(y[i]).epsilon(1e-15));
  double prev = pchip_eval(p, 0.0);
  for (double t = 0.0; t <= 4.0; t += 1e-3) {
    const double v = pchip_eval(p, t);
    CHECK(v >= prev - 1e-12);  // non-decreasing data -> non-decreasing curve
    CHECK(v <= 1.6 + 1e-12);   // no overshoot
    prev = v;
  }
}

TEST_CASE("pchip derivative matches a smooth function") {
  std::vector<double> x, y;
  for (int i = 0; i <= 80; ++i) {
    const double t = 0.1 * i;
    x.push_back(t);
    y.push_back(std::sin(t));
  }
  const Pchip p = build_pchip(x, y);
  for (double t = 0.5; t < 7.5; t += 0.173)
    CHECK(pchip_derivative(p, t) == doctest::Approx(std::cos(t)).epsilon(5e-3));
}

TEST_CASE("pchip rejects malformed knots") {
  CHECK_THROWS_AS(build_pchip({0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(build_pchip({0.0, 1.0}, {0.0, 1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(build_pchip({0.0}, {1.0}), ConfigError);
}

TEST_CASE("convex interpolant stays convex on convex data") {
  // Values of a strictly convex function sampled unevenly.
  std::vector<double> x{0.01, 0.05, 0.2, 0.5, 1.0, 1.7, 2.2, 3.0, 4.0};
  std::vector<double> y;
  for (double t : x) y.push_back(-3.0 * std::cbrt(t));  // -t^{1/3} is convex on t > 0
  const ConvexInterp c = build_convex_interp(x, y);
  // convexity: secants of the evaluated curve are non-decreasing
  const int n = 400;
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i)
    v[std::size_t(i)] = convex_eval(c, 0.01 + (4.0 - 0.01) * i / n);
  for (int i = 2; i <= n; ++i) {
    const double s1 = v[std::size_t(i - 1)] - v[std::size_t(i - 2)];
    const double s2 = v[std::size_t(i)] - v[std::size_t(i - 1)];
    CHECK(s2 >= s1 - 1e-9);
  }
  // derivative is non-decreasing
  double dprev = convex_derivative(c, 0.01);
  for (int i = 1; i <= n; ++i) {
    const double d = convex_derivative(c, 0.01 + (4.0 - 0.01) * i / n);
    CHECK(d >= dprev - 1e-9);
    dprev = d;
  }
}

TEST_CASE("isotonic regression projects onto non-decreasing sequences") {
  const std::vector<double> y{1.0, 3.0, 2.0, 2.0, 5.0, 4.0};
  const auto z = isotonic_nondecreasing(y);
  REQUIRE(z.size() == y.size());
  for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] >= z[i - 1] - 1e-15);
  // Projection of already-monotone data is the identity.
  const std::vector<double> mono{0.0, 0.5, 0.5, 2.0};
  const auto same = isotonic_nondecreasing(mono);
  for (std::size_t i = 0; i < mono.size(); ++i)
    CHECK(same[i] == doctest::Approx(mono[i]).epsilon(1e-15));
  // Pool means preserve the total sum.
  double sy = 0.0, sz = 0.0;
  for (double v : y) sy += v;
  for (double v : z) sz += v;
  CHECK(sy == doctest::Approx(sz).epsilon(1e-14));
}
