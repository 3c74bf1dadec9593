#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace dftlim {

/// Log-uniform radial mesh on [r_min, r_max] with quadrature weights.
///
/// All integrals are evaluated in the variable u = ln r. On each cell the
/// sampled factor is interpolated linearly in u and the power-law Jacobian
/// e^{p u} = r^p is integrated in closed form, so
///   * weights are positive,
///   * constant densities reproduce closed-form volumes to machine precision,
///   * node weights are proportional to r_i^p with coefficients that depend
///     only on the (uniform) log spacing — dilating the grid rescales every
///     quadrature exactly, which makes the dilation identities of the energy
///     terms hold to roundoff instead of to discretization error.
struct RadialGrid {
  std::size_t n = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  double du = 0.0;          ///< uniform spacing in u = ln r
  std::vector<double> r;    ///< nodes, strictly increasing
  std::vector<double> u;    ///< ln(nodes)
  std::vector<double> wv;   ///< volume weights: integral f dV ~ sum wv_i f_i
  std::vector<double> wa;   ///< 1/r-volume weights: integral (f/r) dV ~ sum wa_i f_i

  /// Cumulative-charge cell coefficients (kernel r^3): the charge added on
  /// cell (i-1, i) is 4*pi*(cc_left*r_{i-1}^3*rho_{i-1} + cc_right*r_i^3*rho_i).
  double cc_left = 0.0;
  double cc_right = 0.0;

  std::size_t size() const { return n; }
};

/// Nonnegative density sampled on a radial grid. Functions in this library
/// take (grid, values) pairs; this struct is the bundled form used by the
/// bindings and the CLI.
struct RadialDensity {
  RadialGrid grid;
  std::vector<double> values;
};

/// Build a log-uniform grid. Requires 0 < r_min < r_max and n >= 64.
RadialGrid make_log_grid(double r_min, double r_max, std::size_t n);

/// Throws ConfigError if values has the wrong length or a negative entry.
void validate_density(const RadialGrid& g, const std::vector<double>& rho);

/// Total mass: integral of rho over the (truncated) ball, 4*pi * int rho r^2 dr.
double mass(const RadialGrid& g, const std::vector<double>& rho);

/// Generic volume integral sum(wv_i * f_i) of a node-sampled integrand.
double integrate_volume(const RadialGrid& g, const std::vector<double>& f);

/// Cumulative charge eta_i = 4*pi * int_{r_min}^{r_i} s^2 rho(s) ds.
/// Nondecreasing for rho >= 0; the last entry equals mass(rho) exactly.
std::vector<double> cumulative_charge(const RadialGrid& g,
                                      const std::vector<double>& rho);

/// d(rho)/dr via central differences in u (one-sided at the endpoints).
std::vector<double> radial_derivative(const RadialGrid& g,
                                      const std::vector<double>& rho);

/// Local log-slope d ln rho / d ln r; entries where rho <= 0 are set to 0.
std::vector<double> log_slope(const RadialGrid& g,
                              const std::vector<double>& rho);

/// Mass-preserving dilation: returns the density x -> s^3 rho(s x) carried by
/// the grid with nodes r_i / s (same log spacing, values s^3 rho_i; no
/// resampling). Rejects s <= 0.
RadialDensity pushforward_scale(const RadialGrid& g,
                                const std::vector<double>& rho, double s);

/// Resample a density onto another grid by shape-preserving (monotone cubic)
/// interpolation in u = ln r; values are clamped at >= 0 and the density is 0
/// outside the source range.
std::vector<double> resample(const RadialGrid& src,
                             const std::vector<double>& rho,
                             const RadialGrid& dst);

}  // namespace dftlim
