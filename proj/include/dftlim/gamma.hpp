#pragma once
// Numerical exhibition of the vanishing-gradient limit structure: exact
// single-nucleus collapse of the rescaled energies, and the energy of an
// explicit multi-nucleus recovery configuration along an epsilon ladder.

#include <vector>

#include "dftlim/allocate.hpp"
#include "dftlim/gb.hpp"
#include "dftlim/grid.hpp"
#include "dftlim/model.hpp"
#include "dftlim/single_nucleus.hpp"

namespace dftlim {

// ---------------------------------------------------------------------------
// Single-nucleus collapse
// ---------------------------------------------------------------------------

struct CollapseRow {
  double eps = 0.0;
  double g_eps = 0.0;         ///< min of eps^2 T + eps b C - eps Z U0
  double mass_outside = 0.0;  ///< minimizer mass outside B(0, 10 eps ell)
};

struct CollapseReport {
  std::vector<CollapseRow> rows;
  double direct_energy = 0.0;  ///< the eps = 1 minimum
  double reference = 0.0;      ///< g_b(Z, t) from the evaluator
  double max_rel_spread = 0.0;   ///< max |g_eps - direct| / |direct|
  double reference_gap = 0.0;    ///< |direct - reference| / |reference|
  bool constant_ok = false;      ///< max_rel_spread <= 1e-6
  bool reference_ok = false;     ///< reference_gap <= 1e-6
  bool concentration_ok = false; ///< every mass_outside <= 1e-3 * t
};

/// Solves the eps = 1 problem once at mass t on the family's length-scaled
/// grid [ell r_min, ell r_max], then evaluates the rescaled energy on the
/// concentrating pushforward for each ladder entry (an exact identity of the
/// quadrature, so the spread measures only round-off).
CollapseReport single_nucleus_collapse(const GbEvaluator& ev, double t,
                                       const std::vector<double>& eps_ladder,
                                       double r_min, double r_max, int nodes,
                                       const SolveOptions& opts = {});

/// Independent oracle for the collapse identity: minimizes
/// eps^2 T + eps b C - eps Z U0 directly (coefficients folded into the
/// model) on the eps-shrunk grid and returns the minimum.
double direct_epsilon_solve(const Model& m, double eps, double t,
                            double r_min, double r_max, int nodes,
                            const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// Recovery sequence
// ---------------------------------------------------------------------------

/// One radial bump: a truncated single-nucleus minimizer in its own frame.
struct Carrier {
  RadialGrid grid;
  std::vector<double> rho;
  double mass = 0.0;    ///< discrete mass after truncation
  double radius = 0.0;  ///< support radius after truncation
  double energy = 0.0;  ///< T + b c_corr raw - Z U0 of the truncated bump
};

struct RecoverySequenceSpec {
  NucleiConfig config;        ///< positions are required here
  std::vector<double> alpha;  ///< per-nucleus masses, sum <= config.m
  /// Decreasing ladder; empty means automatic: 6 halvings starting from
  /// 0.8 * (largest eps with all bumps disjoint).
  std::vector<double> eps_ladder;
  double r_min = 1e-6;
  double r_max = 50.0;
  int nodes = 2048;
  double support_floor = 1e-10;  ///< carrier truncation threshold
  /// Optional smooth compact background centered at the origin with profile
  /// A (1 - (r/R)^2)^2, not rescaled along the ladder.
  bool with_background = false;
  double background_mass = 0.0;
  double background_radius = 0.0;  ///< 0 means 0.4 * min_i |X_i|
  SolveOptions opts{};
  /// Pre-built carriers (one per nucleus); empty means build them here by
  /// direct per-nucleus solves at the requested masses.
  std::vector<Carrier> carriers;
};

struct RecoveryRow {
  double eps = 0.0;
  double g_eps = 0.0;
  double cross_attraction = 0.0;   ///< all order-eps attraction terms (>= 0)
  double cross_correlation = 0.0;  ///< all order-eps correlation terms
  double gap = 0.0;           ///< g_eps - sum of carrier energies
  double gap_vs_table = 0.0;  ///< g_eps - sum of g_b from the evaluators
  double mass_total = 0.0;    ///< discrete mass of the configuration
  double corridor_attraction_lo = 0.0;  ///< monopole bracket, lower end
  double corridor_attraction_hi = 0.0;  ///< monopole bracket, upper end
  bool within_corridor = false;  ///< cross terms inside their brackets
};

struct EpsilonReport {
  std::vector<RecoveryRow> rows;
  double reference = 0.0;        ///< sum of discrete carrier energies
  double reference_table = 0.0;  ///< sum of g_b(Z_i, alpha_i) (if evaluators)
  double fitted_slope = 0.0;     ///< LS slope of ln|gap| against ln eps
  bool slope_meaningful = false; ///< false when gaps sit at round-off level
  bool gaps_decreasing = false;  ///< |gap| non-increasing along the ladder
  bool mass_conserved = false;   ///< mass_total constant along the ladder
  std::vector<Carrier> carriers;
  double background_mass = 0.0;  ///< discrete mass of the background bump
};

/// Evaluates the rescaled energy of the explicit recovery configuration
/// (disjoint concentrating bumps at the nuclear positions, optional fixed
/// background) for each ladder entry. Cross terms between disjoint radial
/// bumps are exact point interactions; an overlap at some ladder entry
/// throws NumericalError asking for smaller supports or wider separation.
/// `evaluators` (one per nucleus, optional) only feed reference_table.
EpsilonReport recovery_energy(const RecoverySequenceSpec& spec,
                              const std::vector<GbEvaluator>* evaluators =
                                  nullptr);

}  // namespace dftlim
