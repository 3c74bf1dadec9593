#pragma once

#include <vector>

#include "dftlim/grid.hpp"
#include "dftlim/model.hpp"

namespace dftlim {

/// Raised when a gradient-kinetic integrand is evaluated where the density
/// vanishes but its derivative does not (the integrand would be infinite;
/// such nodes are skipped and counted — callers should floor the density).
struct KineticDiagnostics {
  bool gradient_at_zero_density = false;
  int flagged_nodes = 0;
};

/// Density floor used inside rho^alpha when alpha < 0.
constexpr double kDensityFloor = 1e-30;

/// Kinetic term including c_kin (but not b or Z).
double kinetic_energy(const Model& m, const RadialGrid& g,
                      const std::vector<double>& rho,
                      KineticDiagnostics* diag = nullptr);

/// Correlation term including c_corr (but not b). For Coulomb correlation
/// this is c_corr * (the raw double integral below).
double correlation_energy(const Model& m, const RadialGrid& g,
                          const std::vector<double>& rho);

/// Raw Coulomb double integral  integral rho(x) rho(y)/|x-y| dx dy  of the
/// shell model: node charges q_i = wv_i rho_i lumped on spheres of radius
/// r_i, energy sum_{ij} q_i q_j / max(r_i, r_j), evaluated in O(n) via the
/// cumulative charge. No coefficient.
double coulomb_raw(const RadialGrid& g, const std::vector<double>& rho);

/// Same quantity by the O(n^2) double sum — an independent oracle.
/// Rejects grids with more than 4096 nodes.
double coulomb_raw_bruteforce(const RadialGrid& g,
                              const std::vector<double>& rho);

/// Hartree self-energy D(rho) = (1/2) * coulomb_raw_bruteforce — the
/// physical convention with the 1/2, via the O(n^2) oracle path.
double hartree_bruteforce(const RadialGrid& g, const std::vector<double>& rho);

/// Potential Phi(r_j) = integral rho(y)/|y - x_j| dy of the shell model:
/// eta(r_j)/r_j + sum of outer charges over their radii. The derivative of
/// coulomb_raw with respect to rho_j is exactly 2 * wv_j * Phi_j.
std::vector<double> coulomb_potential(const RadialGrid& g,
                                      const std::vector<double>& rho);

/// Linear action of the same shell kernel on a signed node vector:
/// (K v)_j = sum_i wv_i v_i / max(r_i, r_j). Identical to coulomb_potential
/// for nonnegative input but skips the density validation, so iterative
/// solvers can apply it to search directions. The quadratic form
/// sum_j wv_j v_j (K v)_j equals coulomb_raw(v) for admissible v.
std::vector<double> coulomb_action(const RadialGrid& g,
                                   const std::vector<double>& v);

/// Attraction integral rho(x)/|x| dx (no charge coefficient).
double attraction_energy(const RadialGrid& g, const std::vector<double>& rho);

/// kinetic + b * correlation - Z * attraction.
double total_energy(const Model& m, const RadialGrid& g,
                    const std::vector<double>& rho,
                    KineticDiagnostics* diag = nullptr);

/// (integral rho^p dV)^{1/p}.
double lp_norm(const RadialGrid& g, const std::vector<double>& rho, double p);

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double slack = 0.0;  ///< rhs - lhs
};

/// Checks U0(rho) <= |rho|_{5/3} (8 pi)^{2/5} delta^{1/5} + mass/delta,
/// the split of the attraction integral at radius delta.
BoundReport check_tu_bound(const RadialGrid& g, const std::vector<double>& rho,
                           double delta);

/// Checks the far-field bound int_{|x|>=R} rho/|x| dx <= sqrt(2 D / R) with
/// D = (1/2) coulomb_raw (tail summed over nodes with r_i >= R).
BoundReport check_far_field_bound(const RadialGrid& g,
                                  const std::vector<double>& rho, double R);

}  // namespace dftlim
