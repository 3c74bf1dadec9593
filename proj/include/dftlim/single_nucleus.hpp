#pragma once

#include <vector>

#include "dftlim/functionals.hpp"
#include "dftlim/grid.hpp"
#include "dftlim/model.hpp"

namespace dftlim {

/// Tolerances and iteration caps for the constrained minimizers.
struct SolveOptions {
  double multiplier_tol = 1e-14;  ///< relative bisection width on theta
  double mass_tol = 1e-11;        ///< |achieved - requested| / (1 + requested)
  double scf_tol = 1e-12;         ///< fixed-point increment per unit mass
  double pgd_tol = 1e-9;          ///< projected-gradient stationarity
  int max_bisect = 240;
  int max_scf = 8000;
  int max_pgd = 40000;
  double density_floor = 1e-30;   ///< lower bound kept by the descent solver
};

/// Minimizer of  kinetic + b correlation - Z attraction  subject to
/// mass <= t (theta is the multiplier of the mass constraint; theta = 0
/// when the constraint is inactive).
struct SolveResult {
  RadialGrid grid;
  std::vector<double> rho;
  double energy = 0.0;
  double theta = 0.0;
  double t_requested = 0.0;
  double t_achieved = 0.0;
  bool saturated = false;  ///< constraint inactive: unconstrained minimum
  bool converged = false;
  int iterations = 0;
  double support_radius = 0.0;
  KineticDiagnostics kinetic_diag;
};

/// Solves a u^2 + c u = s for u >= 0 (a > 0, c >= 0, s >= 0) in the
/// cancellation-free form u = 2 s / (c + sqrt(c^2 + 4 a s)).
double tf_pointwise_inversion(double a, double c, double s);

/// Normalized pointwise Euler-Lagrange inversion of the unit-coefficient
/// Thomas-Fermi + local-power model: returns rho = u^3 where u >= 0 solves
/// (5/3) u^2 + u = s. Exact algebraic solve.
double solve_tf_pointwise_inversion(double s);

/// Pointwise Euler-Lagrange profile of a Thomas-Fermi + local-power model
/// under the bare potential: rho_i = u_i^3 with
///   (5 c_kin / 3) u^2 + (4 b c_corr / 3) u = (Z / r_i - theta)^+ .
/// Also used as the initial guess of the iterative solvers.
std::vector<double> tf_profile(const Model& m, const RadialGrid& g,
                               double theta);

/// First partials dE/drho_j of the total energy (all model coefficients
/// included), using the exact adjoint of the discrete gradient stencil.
std::vector<double> energy_gradient(const Model& m, const RadialGrid& g,
                                    const std::vector<double>& rho);

/// Mass-weighted average of -dE/drho_j / wv_j over nodes with
/// rho_j > support_threshold: the multiplier estimate implied by
/// stationarity on the support.
double estimate_multiplier(const Model& m, const RadialGrid& g,
                           const std::vector<double>& rho,
                           double support_threshold);

/// Minimizes the total energy subject to mass <= t, rho >= 0.
///
/// Dispatch: Thomas-Fermi kinetic + local-power correlation is solved by
/// exact pointwise inversion with an outer bisection on theta;
/// Thomas-Fermi + Coulomb by a damped self-consistent field iteration
/// inside the theta bisection; gradient kinetic (either correlation) by
/// projected gradient descent with Barzilai-Borwein steps.
///
/// If the constraint turns out inactive, Coulomb-correlation families
/// return the unconstrained minimum with saturated = true; local-power
/// families throw NumericalError, because their unconstrained mass is a
/// truncation artifact of the finite grid (it grows without bound as
/// r_max does).
SolveResult solve_constrained(const Model& m, const RadialGrid& g, double t,
                              const SolveOptions& opts = {});

/// Minimizes with no mass constraint (theta = 0). For local-power
/// correlation the result depends on r_max; see solve_constrained.
SolveResult solve_unconstrained(const Model& m, const RadialGrid& g,
                                const SolveOptions& opts = {});

/// Least-squares fit of ln rho against ln r over grid nodes with
/// r in [r_lo, r_hi] and rho > 0.
struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;  ///< ln of the fitted prefactor
  int n_points = 0;
};

TailFit fit_tail(const RadialGrid& g, const std::vector<double>& rho,
                 double r_lo, double r_hi);

/// exp(mean of ln(rho_i r_i^{-slope})) over the window: the prefactor A of
/// rho ~ A r^slope when the exponent is pinned rather than fitted.
double fixed_slope_prefactor(const RadialGrid& g,
                             const std::vector<double>& rho, double r_lo,
                             double r_hi, double slope);

/// Largest r_i with rho_i > threshold (0 if none).
double measured_support_radius(const RadialGrid& g,
                               const std::vector<double>& rho,
                               double threshold = 0.0);

/// Support-radius report for a solved density.
struct SupportReport {
  double radius = 0.0;  ///< largest node radius with rho above the floor
  bool degenerate = false;  ///< density never exceeds the floor (radius=r_min)
  bool unbounded_within_domain = false;  ///< rho(r_max) still above the floor
};

/// Largest node radius where the density exceeds `floor`. A density that
/// never exceeds the floor reports radius = r_min with degenerate = true; a
/// density still above the floor at the outer boundary sets
/// unbounded_within_domain (the true support may extend past the domain).
SupportReport support_radius(const SolveResult& sol, double floor = 1e-10);

}  // namespace dftlim
