#pragma once
// Rescaling of the normalized single-site energy curve to general (b, Z):
// the cell energy satisfies g_b(Z, alpha) = E_s * L(alpha * M_s), where E_s
// and M_s are the family's closed-form energy and mass scales. One shared
// normalized table serves every (b, Z).

#include <memory>
#include <string>
#include <vector>

#include "dftlim/ltable.hpp"
#include "dftlim/model.hpp"
#include "dftlim/single_nucleus.hpp"

namespace dftlim {

/// Per-nucleus evaluator of g_b(Z, .). Immutable after construction;
/// concurrent reads are safe.
class GbEvaluator {
 public:
  /// `interp` must wrap the normalized (b = Z = 1) table of the same family
  /// and beta.
  GbEvaluator(const std::string& family, double b, double Z, double beta,
              std::shared_ptr<const LInterp> interp);

  /// g_b(Z, alpha); alpha = 0 gives exactly 0.
  double value(double alpha) const;

  /// d/dalpha of g_b(Z, alpha); always <= 0 and non-decreasing in alpha.
  double derivative(double alpha) const;

  /// Water-filling inverse: the mass at which the marginal energy
  /// derivative(alpha) crosses `slope` (< 0), capped at saturation_alpha().
  /// With clamp_to_table, arguments past table coverage return the covered
  /// endpoint instead of throwing (callers re-check coverage afterwards).
  double alpha_for_slope(double slope, bool clamp_to_table = false) const;

  /// Mass beyond which g_b stays flat (infinite for local-power families).
  double saturation_alpha() const;

  /// Largest alpha the table covers without extrapolation.
  double alpha_max_covered() const;

  double energy_scale() const { return es_; }
  double mass_scale() const { return ms_; }
  const Model& model() const { return model_; }
  const LInterp& interp() const { return *interp_; }

 private:
  Model model_;
  std::shared_ptr<const LInterp> interp_;
  double es_ = 1.0;
  double ms_ = 1.0;
};

/// Contract-named free functions over the evaluator.
double gb(const GbEvaluator& ev, double alpha);
double gb_derivative(const GbEvaluator& ev, double alpha);

/// Loads (or builds) the normalized table for (family, beta) from
/// `cache_dir`, audits it, and wraps it in a shared interpolant. Audit
/// failures throw NumericalError listing the offending rows. An empty
/// `t_values` means the default abscissae.
std::shared_ptr<const LInterp> build_l_interp(
    const std::string& cache_dir, const std::string& family, double beta,
    double r_min, double r_max, int nodes,
    const std::vector<double>& t_values = {}, const SolveOptions& opts = {},
    int n_threads = 0);

/// Convenience: build_l_interp + GbEvaluator in one call.
GbEvaluator make_gb_evaluator(const std::string& cache_dir,
                              const std::string& family, double b, double Z,
                              double beta, double r_min, double r_max,
                              int nodes,
                              const std::vector<double>& t_values = {},
                              const SolveOptions& opts = {},
                              int n_threads = 0);

/// Numerical check of the closed-form rescaling: solves the (b, Z) problem
/// directly on the length-rescaled grid and compares with the rescaled
/// table value.
struct ScalingCheck {
  double direct = 0.0;     ///< constrained solve with (b, Z), mass alpha
  double predicted = 0.0;  ///< gb(evaluator, alpha)
  double gap = 0.0;        ///< |direct - predicted| / max(|direct|, tiny)
};

ScalingCheck verify_scaling(const GbEvaluator& ev, double alpha, double r_min,
                            double r_max, int nodes,
                            const SolveOptions& opts = {});

}  // namespace dftlim
