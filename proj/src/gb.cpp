#include "dftlim/gb.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "dftlim/errors.hpp"
#include "dftlim/grid.hpp"

namespace dftlim {

GbEvaluator::GbEvaluator(const std::string& family, double b, double Z,
                         double beta, std::shared_ptr<const LInterp> interp)
    : model_(make_model(family, b, Z, beta)), interp_(std::move(interp)) {
  if (!interp_) throw ConfigError("GbEvaluator: null interpolant");
  if (interp_->table().family != family)
    throw ConfigError("GbEvaluator: table family '" +
                      interp_->table().family + "' does not match '" + family +
                      "'");
  if (is_gradient_kinetic(model_) &&
      std::abs(interp_->table().beta - model_.beta) > 1e-12)
    throw ConfigError("GbEvaluator: table beta does not match the model");
  const ScalingMap sm = scaling_map(model_);
  es_ = sm.energy_scale;
  ms_ = sm.mass_scale;
}

double GbEvaluator::value(double alpha) const {
  if (alpha < 0.0) throw ConfigError("gb: alpha must be >= 0");
  if (alpha == 0.0) return 0.0;
  return es_ * interp_->value(alpha * ms_);
}

double GbEvaluator::derivative(double alpha) const {
  if (!(alpha > 0.0)) throw ConfigError("gb_derivative: alpha must be > 0");
  return es_ * ms_ * interp_->derivative(alpha * ms_);
}

double GbEvaluator::alpha_for_slope(double slope, bool clamp_to_table) const {
  return interp_->derivative_inverse(slope / (es_ * ms_), clamp_to_table) /
         ms_;
}

double GbEvaluator::saturation_alpha() const {
  return interp_->saturation_mass() / ms_;
}

double GbEvaluator::alpha_max_covered() const {
  return interp_->t_max() / ms_;
}

double gb(const GbEvaluator& ev, double alpha) { return ev.value(alpha); }

double gb_derivative(const GbEvaluator& ev, double alpha) {
  return ev.derivative(alpha);
}

std::shared_ptr<const LInterp> build_l_interp(
    const std::string& cache_dir, const std::string& family, double beta,
    double r_min, double r_max, int nodes,
    const std::vector<double>& t_values, const SolveOptions& opts,
    int n_threads) {
  const std::vector<double>& ts =
      t_values.empty() ? default_t_values(family) : t_values;
  LTable tab = load_or_build_l_table(cache_dir, family, beta, r_min, r_max,
                                     nodes, ts, opts, n_threads);
  const AuditReport audit = audit_l_table(tab);
  if (!audit.ok) {
    std::string msg = "table audit failed for family '" + family + "':";
    for (const auto& f : audit.failures) msg += "\n  - " + f;
    throw NumericalError(msg);
  }
  return std::make_shared<const LInterp>(std::move(tab));
}

GbEvaluator make_gb_evaluator(const std::string& cache_dir,
                              const std::string& family, double b, double Z,
                              double beta, double r_min, double r_max,
                              int nodes, const std::vector<double>& t_values,
                              const SolveOptions& opts, int n_threads) {
  return GbEvaluator(family, b, Z, beta,
                     build_l_interp(cache_dir, family, beta, r_min, r_max,
                                    nodes, t_values, opts, n_threads));
}

ScalingCheck verify_scaling(const GbEvaluator& ev, double alpha, double r_min,
                            double r_max, int nodes,
                            const SolveOptions& opts) {
  if (alpha < 0.0) throw ConfigError("verify_scaling: alpha must be >= 0");
  const Model& m = ev.model();
  const ScalingMap sm = scaling_map(m);
  const RadialGrid g = make_log_grid(r_min * sm.length_scale,
                                     r_max * sm.length_scale,
                                     static_cast<std::size_t>(nodes));
  const SolveResult direct = solve_constrained(m, g, alpha, opts);
  if (!direct.converged)
    throw NumericalError("verify_scaling: direct solve did not converge");
  ScalingCheck out;
  out.direct = direct.energy;
  out.predicted = ev.value(alpha);
  out.gap = std::abs(out.direct - out.predicted) /
            std::max(std::abs(out.direct), 1e-300);
  return out;
}

}  // namespace dftlim
