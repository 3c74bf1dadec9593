#include "dftlim/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dftlim/errors.hpp"

namespace dftlim {

namespace {

/// Index of the interval [x_k, x_{k+1}] containing x (clamped to the ends).
std::size_t locate(const std::vector<double>& xs, double x) {
  if (x <= xs.front()) return 0;
  if (x >= xs.back()) return xs.size() - 2;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  return static_cast<std::size_t>(it - xs.begin()) - 1;
}

void hermite_terms(const Pchip& p, std::size_t k, double x, double* value,
                   double* deriv) {
  const double h = p.x[k + 1] - p.x[k];
  const double t = (x - p.x[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  if (value != nullptr) {
    *value = h00 * p.y[k] + h * h10 * p.m[k] + h01 * p.y[k + 1] +
             h * h11 * p.m[k + 1];
  }
  if (deriv != nullptr) {
    const double d00 = (6.0 * t2 - 6.0 * t) / h;
    const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double d01 = (-6.0 * t2 + 6.0 * t) / h;
    const double d11 = 3.0 * t2 - 2.0 * t;
    *deriv = d00 * p.y[k] + d10 * p.m[k] + d01 * p.y[k + 1] + d11 * p.m[k + 1];
  }
}

}  // namespace

Pchip build_pchip(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("interpolation needs >= 2 knots with matching values");
  }
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] > x[i])) {
      std::ostringstream msg;
      msg << "interpolation knots must be strictly increasing; knot " << i + 1
          << " (" << x[i + 1] << ") does not exceed knot " << i << " (" << x[i]
          << ")";
      throw ConfigError(msg.str());
    }
  }
  const std::size_t n = x.size();
  Pchip p;
  p.x = x;
  p.y = y;
  p.m.assign(n, 0.0);

  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    p.m[0] = p.m[1] = d[0];
    return p;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      p.m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      p.m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  // One-sided endpoint slopes, limited to preserve shape near the boundary.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) {
      m = 0.0;
    } else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) {
      m = 3.0 * d0;
    }
    return m;
  };
  p.m[0] = end_slope(h[0], h[1], d[0], d[1]);
  p.m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return p;
}

double pchip_eval(const Pchip& p, double x) {
  const std::size_t k = locate(p.x, x);
  double v = 0.0;
  hermite_terms(p, k, x, &v, nullptr);
  return v;
}

double pchip_derivative(const Pchip& p, double x) {
  const std::size_t k = locate(p.x, x);
  double d = 0.0;
  hermite_terms(p, k, x, nullptr, &d);
  return d;
}

ConvexInterp build_convex_interp(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  ConvexInterp c;
  c.base = build_pchip(x, y);
  const std::size_t n = x.size();
  c.linear.assign(n - 1, 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double secant = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    // The Hermite cell is convex iff its (linear) second derivative is
    // non-negative at both ends: 2(s - m_k) >= m_{k+1} - s and
    // 2(m_{k+1} - s) >= s - m_k.
    const double a = secant - c.base.m[k];
    const double b = c.base.m[k + 1] - secant;
    const double tol = 1e-12 * (1.0 + std::abs(secant));
    if (a < -tol || b < -tol || 2.0 * a - b < -tol || 2.0 * b - a < -tol) {
      c.linear[k] = 1;
    }
  }
  return c;
}

double convex_eval(const ConvexInterp& c, double x) {
  const std::size_t k = locate(c.base.x, x);
  if (c.linear[k]) {
    const double t = (x - c.base.x[k]) / (c.base.x[k + 1] - c.base.x[k]);
    return (1.0 - t) * c.base.y[k] + t * c.base.y[k + 1];
  }
  double v = 0.0;
  hermite_terms(c.base, k, x, &v, nullptr);
  return v;
}

double convex_derivative(const ConvexInterp& c, double x) {
  const std::size_t k = locate(c.base.x, x);
  if (c.linear[k]) {
    return (c.base.y[k + 1] - c.base.y[k]) / (c.base.x[k + 1] - c.base.x[k]);
  }
  double d = 0.0;
  hermite_terms(c.base, k, x, nullptr, &d);
  return d;
}

std::vector<double> isotonic_nondecreasing(const std::vector<double>& y) {
  // Pool adjacent violators with unit weights.
  const std::size_t n = y.size();
  std::vector<double> level;
  std::vector<double> weight;
  level.reserve(n);
  weight.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lv = y[i];
    double wt = 1.0;
    while (!level.empty() && level.back() > lv) {
      lv = (lv * wt + level.back() * weight.back()) / (wt + weight.back());
      wt += weight.back();
      level.pop_back();
      weight.pop_back();
    }
    level.push_back(lv);
    weight.push_back(wt);
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t b = 0; b < level.size(); ++b) {
    for (std::size_t k = 0; k < static_cast<std::size_t>(weight[b] + 0.5); ++k) {
      out.push_back(level[b]);
    }
  }
  return out;
}

}  // namespace dftlim
