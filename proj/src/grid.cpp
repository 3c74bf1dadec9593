#include "dftlim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dftlim/errors.hpp"
#include "dftlim/interpolation.hpp"

namespace dftlim {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Closed-form cell coefficients for int_0^1 (1-tau) e^{g tau} dtau and
/// int_0^1 tau e^{g tau} dtau * e^{-g}; both tend to 1/2 as g -> 0.
double coef_left(double g) {
  if (std::abs(g) < 1e-5) {
    return 0.5 + g / 6.0 + g * g / 24.0;
  }
  return (std::exp(g) - 1.0 - g) / (g * g);
}

double coef_right(double g) {
  if (std::abs(g) < 1e-5) {
    return 0.5 - g / 6.0 + g * g / 24.0;
  }
  return (g - 1.0 + std::exp(-g)) / (g * g);
}

/// Node weights for int f(r) r^p du on the log grid with the r^p kernel
/// integrated exactly against a piecewise-linear (in u) interpolant of f.
std::vector<double> kernel_weights(const std::vector<double>& r, double du,
                                   double p) {
  const std::size_t n = r.size();
  const double g = p * du;
  const double ca = coef_left(g);
  const double cb = coef_right(g);
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double rpl = std::pow(r[i], p);
    const double rpr = std::pow(r[i + 1], p);
    w[i] += du * ca * rpl;
    w[i + 1] += du * cb * rpr;
  }
  return w;
}

}  // namespace

RadialGrid make_log_grid(double r_min, double r_max, std::size_t n) {
  if (!(r_min > 0.0) || !(r_max > r_min)) {
    std::ostringstream msg;
    msg << "invalid radial range: need 0 < r_min < r_max, got r_min=" << r_min
        << " r_max=" << r_max;
    throw ConfigError(msg.str());
  }
  if (n < 64) {
    std::ostringstream msg;
    msg << "radial grid needs at least 64 nodes, got " << n;
    throw ConfigError(msg.str());
  }
  RadialGrid g;
  g.n = n;
  g.r_min = r_min;
  g.r_max = r_max;
  const double u0 = std::log(r_min);
  const double u1 = std::log(r_max);
  g.du = (u1 - u0) / static_cast<double>(n - 1);
  g.u.resize(n);
  g.r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.u[i] = u0 + static_cast<double>(i) * g.du;
    g.r[i] = std::exp(g.u[i]);
  }
  std::vector<double> w3 = kernel_weights(g.r, g.du, 3.0);
  std::vector<double> w2 = kernel_weights(g.r, g.du, 2.0);
  g.wv.resize(n);
  g.wa.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.wv[i] = 4.0 * kPi * w3[i];
    g.wa[i] = 4.0 * kPi * w2[i];
  }
  const double g3 = 3.0 * g.du;
  g.cc_left = g.du * coef_left(g3);
  g.cc_right = g.du * coef_right(g3);
  return g;
}

void validate_density(const RadialGrid& g, const std::vector<double>& rho) {
  if (rho.size() != g.n) {
    std::ostringstream msg;
    msg << "density has " << rho.size() << " values but the grid has " << g.n
        << " nodes";
    throw ConfigError(msg.str());
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0) || !std::isfinite(rho[i])) {
      std::ostringstream msg;
      msg << "density must be finite and non-negative; value " << rho[i]
          << " at node " << i << " (r=" << g.r[i] << ")";
      throw ConfigError(msg.str());
    }
  }
}

double mass(const RadialGrid& g, const std::vector<double>& rho) {
  return integrate_volume(g, rho);
}

double integrate_volume(const RadialGrid& g, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) s += g.wv[i] * f[i];
  return s;
}

std::vector<double> cumulative_charge(const RadialGrid& g,
                                      const std::vector<double>& rho) {
  std::vector<double> eta(g.n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < g.n; ++i) {
    const double r3l = g.r[i - 1] * g.r[i - 1] * g.r[i - 1];
    const double r3r = g.r[i] * g.r[i] * g.r[i];
    acc += 4.0 * kPi * (g.cc_left * r3l * rho[i - 1] + g.cc_right * r3r * rho[i]);
    eta[i] = acc;
  }
  return eta;
}

std::vector<double> radial_derivative(const RadialGrid& g,
                                      const std::vector<double>& rho) {
  const std::size_t n = g.n;
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (rho[1] - rho[0]) / (g.du * g.r[0]);
  d[n - 1] = (rho[n - 1] - rho[n - 2]) / (g.du * g.r[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d[i] = (rho[i + 1] - rho[i - 1]) / (2.0 * g.du * g.r[i]);
  }
  return d;
}

std::vector<double> log_slope(const RadialGrid& g,
                              const std::vector<double>& rho) {
  const std::size_t n = g.n;
  std::vector<double> s(n, 0.0);
  auto safe_log = [](double v) { return std::log(v); };
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rho[i] > 0.0)) continue;
    if (i == 0) {
      if (rho[1] > 0.0) s[0] = (safe_log(rho[1]) - safe_log(rho[0])) / g.du;
    } else if (i + 1 == n) {
      if (rho[n - 2] > 0.0)
        s[n - 1] = (safe_log(rho[n - 1]) - safe_log(rho[n - 2])) / g.du;
    } else if (rho[i - 1] > 0.0 && rho[i + 1] > 0.0) {
      s[i] = (safe_log(rho[i + 1]) - safe_log(rho[i - 1])) / (2.0 * g.du);
    }
  }
  return s;
}

RadialDensity pushforward_scale(const RadialGrid& g,
                                const std::vector<double>& rho, double s) {
  if (!(s > 0.0)) {
    std::ostringstream msg;
    msg << "pushforward scale must be positive, got " << s;
    throw ConfigError(msg.str());
  }
  RadialDensity out;
  out.grid = make_log_grid(g.r_min / s, g.r_max / s, g.n);
  out.values.resize(g.n);
  const double s3 = s * s * s;
  for (std::size_t i = 0; i < g.n; ++i) out.values[i] = s3 * rho[i];
  return out;
}

std::vector<double> resample(const RadialGrid& src,
                             const std::vector<double>& rho,
                             const RadialGrid& dst) {
  Pchip interp = build_pchip(src.u, rho);
  std::vector<double> out(dst.n, 0.0);
  for (std::size_t i = 0; i < dst.n; ++i) {
    const double u = dst.u[i];
    if (u < src.u.front() || u > src.u.back()) continue;
    out[i] = std::max(0.0, pchip_eval(interp, u));
  }
  return out;
}

}  // namespace dftlim
