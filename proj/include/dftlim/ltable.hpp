#pragma once

#include <string>
#include <vector>

#include "dftlim/interpolation.hpp"
#include "dftlim/model.hpp"
#include "dftlim/single_nucleus.hpp"

namespace dftlim {

/// One solved point of the normalized value function
///   L(t) = min { kinetic + correlation - attraction : mass <= t }
/// at unit coefficients (b = Z = 1). By the envelope theorem L'(t) equals
/// minus the mass multiplier theta of the solve.
struct LTableRow {
  double t = 0.0;
  double value = 0.0;
  double t_achieved = 0.0;
  double theta = 0.0;
  double lprime_diff = 0.0;     ///< centered secant slope (filled post hoc)
  double support_radius = 0.0;
  double tail_density = 0.0;    ///< density at the outermost node
  int iterations = 0;
  bool converged = false;
  bool saturated = false;
};

struct LTable {
  std::string family;
  double beta = 5.0 / 3.0;
  double r_min = 0.0, r_max = 0.0;
  int nodes = 0;
  /// Grid-measured mass of the unconstrained minimum; infinity for
  /// local-power correlation (where it is a truncation artifact).
  double saturation_mass = 0.0;
  double saturation_value = 0.0;  ///< energy at the unconstrained minimum
  std::vector<LTableRow> rows;  ///< sorted by t
  std::string model_fp;
  std::string grid_fp;
};

/// Default abscissae: 64 geometric points on [1e-4, 4] (neighbour ratio
/// about 1.18, small enough for the secant/multiplier consistency audit),
/// plus a cluster around t = 1 for Coulomb-correlation families whose
/// normalized saturation mass sits there.
std::vector<double> default_t_values(const std::string& family);

LTable build_l_table(const std::string& family, double beta, double r_min,
                     double r_max, int nodes,
                     const std::vector<double>& t_values,
                     const SolveOptions& opts = {}, int n_threads = 0);

struct AuditReport {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Structural checks on a built table: all rows converged; achieved masses
/// match requests; values non-increasing in t; secant slopes non-decreasing
/// (convexity); centered secants consistent with the multipliers to 5e-3
/// relative.
AuditReport audit_l_table(const LTable& table);

std::string l_table_cache_path(const std::string& cache_dir,
                               const LTable& table);

/// Loads a cached table if its fingerprints match, builds any requested
/// abscissae that are missing, merges, and rewrites the cache atomically.
/// An empty cache_dir disables caching. Never returns fewer rows than
/// requested; may return more (the cache keeps a superset).
LTable load_or_build_l_table(const std::string& cache_dir,
                             const std::string& family, double beta,
                             double r_min, double r_max, int nodes,
                             const std::vector<double>& t_values,
                             const SolveOptions& opts = {}, int n_threads = 0);

/// Interpolating evaluator of L and L'.
///
/// Inside the table range the value uses a convexity-preserving monotone
/// cubic and the derivative a monotone cubic through the (isotonically
/// regularized) multiplier column. Below the smallest abscissa both follow
/// the power law  L(t) = -c t^p  matched continuously at t_min (p pinned
/// to the exact concentration exponent 1/3 for the pointwise-kinetic
/// Coulomb family, fitted from the first rows otherwise). Above the table
/// range Coulomb-correlation families plateau
/// at the unconstrained value; local-power families throw ConfigError,
/// since their true value keeps decreasing (extend the table instead).
class LInterp {
 public:
  explicit LInterp(LTable table);

  double value(double t) const;
  double derivative(double t) const;

  /// Largest t with L'(t) <= slope (slope < 0), capped at the saturation
  /// mass. For slope >= 0 returns the saturation mass (infinite for
  /// local-power families). A slope flatter than L'(t_max) on a family
  /// with no plateau lies beyond table coverage: with clamp_to_table the
  /// call returns t_max (callers must re-check coverage on final answers),
  /// otherwise it throws ConfigError.
  double derivative_inverse(double slope, bool clamp_to_table = false) const;

  double t_min() const { return tab_.rows.front().t; }
  double t_max() const { return tab_.rows.back().t; }

  /// Saturation mass used for caps. For the pointwise-kinetic Coulomb
  /// family this is snapped to the structural value Z/b = 1 (the measured
  /// one differs only by discretization error); otherwise the measured
  /// value (infinite for local-power correlation).
  double saturation_mass() const { return sat_mass_structural_; }
  double measured_saturation_mass() const { return tab_.saturation_mass; }

  double small_t_amplitude() const { return c_small_; }
  double small_t_exponent() const { return p_small_; }

  const LTable& table() const { return tab_; }

 private:
  LTable tab_;
  ConvexInterp value_;
  Pchip lprime_;
  double c_small_ = 0.0, p_small_ = 1.0 / 3.0;
  double sat_mass_structural_ = 0.0;
  bool coulomb_ = false;
};

}  // namespace dftlim
