#pragma once

#include <cstddef>
#include <vector>

namespace dftlim {

/// Shape-preserving cubic Hermite interpolant (Fritsch–Carlson slopes):
/// monotone data produce a monotone interpolant with no overshoot.
struct Pchip {
  std::vector<double> x;  ///< strictly increasing knots
  std::vector<double> y;
  std::vector<double> m;  ///< node slopes
};

Pchip build_pchip(const std::vector<double>& x, const std::vector<double>& y);

double pchip_eval(const Pchip& p, double x);
double pchip_derivative(const Pchip& p, double x);

/// Convexity-audited variant for convex data: intervals where the cubic
/// could violate convexity (node slopes not bracketing the secant) fall back
/// to linear interpolation on that interval.
struct ConvexInterp {
  Pchip base;
  std::vector<char> linear;  ///< per-interval fallback flags
};

ConvexInterp build_convex_interp(const std::vector<double>& x,
                                 const std::vector<double>& y);

double convex_eval(const ConvexInterp& c, double x);
double convex_derivative(const ConvexInterp& c, double x);

/// Pool-adjacent-violators: least-squares non-decreasing fit to y.
std::vector<double> isotonic_nondecreasing(const std::vector<double>& y);

}  // namespace dftlim
