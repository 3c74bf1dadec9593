#pragma once
// Electron-mass allocation across nuclei: minimize the sum of per-nucleus
// cell energies Sum_k g_b(Z_k, alpha_k) subject to Sum_k alpha_k <= m,
// alpha_k >= 0. Solved by water-filling on the common marginal energy.

#include <array>
#include <string>
#include <vector>

#include "dftlim/gb.hpp"

namespace dftlim {

struct NucleiConfig {
  std::string family;
  double b = 1.0;
  double beta = 5.0 / 3.0;           ///< gradient exponent (vW families)
  std::vector<double> Z;             ///< nuclear charges, Z_k > 0
  std::vector<std::array<double, 3>> X;  ///< positions; may be empty when
                                         ///< only the allocation is needed
  double m = 0.0;                    ///< total electron mass, >= 0
};

/// Checks the config invariants (M >= 1, positive charges, m >= 0, pairwise
/// distinct positions when given) and throws ConfigError listing every
/// violation at once.
void validate_config(const NucleiConfig& cfg);

struct KktReport {
  bool ok = false;
  /// max over nuclei with alpha_k > 0 of |g'_k(alpha_k) + lambda|/(1+lambda)
  double max_stationarity = 0.0;
  double feasibility_excess = 0.0;  ///< max(0, total_mass - m)
  double complementarity = 0.0;     ///< lambda * (m - total_mass)
  bool caps_respected = true;
  std::vector<std::string> notes;
};

struct AllocationResult {
  std::vector<double> alpha;
  double lambda = 0.0;
  double total_mass = 0.0;
  double energy = 0.0;
  bool ionized = false;   ///< strictly positive leftover mass at the optimum
  double leftover = 0.0;  ///< m - total_mass
  KktReport kkt;
};

/// Water-filling optimizer. lambda = 0 is handled first: when every cap is
/// finite and their sum is at most m, the optimum fills each nucleus to its
/// cap and the remaining mass stays unassigned (ionized regime). Otherwise
/// lambda > 0 is bisected until the filled masses add up to m. Every result
/// carries a KKT certificate with stationarity tolerance `tol`.
AllocationResult allocate(const NucleiConfig& cfg,
                          const std::vector<GbEvaluator>& evaluators,
                          double tol = 5e-3);

/// Exact allocation for the pointwise-kinetic local-power family:
/// alpha_k = m * Z_k^3 / Sum_j Z_j^3 (proportional to the cubed charges).
std::vector<double> closed_form_tfc0(const std::vector<double>& Z, double m);

/// Largest electron mass a single nucleus binds: Z/b exactly for the
/// pointwise-kinetic Coulomb family, (measured unconstrained mass) * Z/b
/// for gradient-kinetic Coulomb families, infinite for local-power
/// correlation.
double ionization_threshold(const GbEvaluator& evaluator);

/// Order check on the per-charge filling fractions alpha_k / Z_k for a
/// two-nucleus pointwise-kinetic Coulomb configuration below ionization:
/// the smaller charge fills a strictly smaller fraction.
struct FillingOrderReport {
  bool applicable = false;  ///< two nuclei, Coulomb family, not ionized
  bool holds = false;
  double ratio_small = 0.0;  ///< alpha/Z at the smaller charge
  double ratio_large = 0.0;  ///< alpha/Z at the larger charge
};

FillingOrderReport relative_filling_order(const AllocationResult& result,
                                          const NucleiConfig& cfg);

}  // namespace dftlim
