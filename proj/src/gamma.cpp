#include "dftlim/gamma.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "dftlim/errors.hpp"
#include "dftlim/functionals.hpp"
#include "dftlim/io.hpp"

namespace dftlim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm3(const std::array<double, 3>& a) {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::vector<double> descending_unique(std::vector<double> eps) {
  for (double e : eps)
    if (!(e > 0.0))
      throw ConfigError("epsilon ladder entries must be positive");
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  std::vector<double> out;
  for (double e : eps)
    if (out.empty() || e < out.back() * (1.0 - 1e-12)) out.push_back(e);
  if (out.empty()) throw ConfigError("epsilon ladder is empty");
  return out;
}

/// eps^2 T + eps b C - eps Z U0 of a density in the laboratory frame.
double rescaled_energy(const Model& m, double eps, const RadialGrid& g,
                       const std::vector<double>& rho) {
  return eps * eps * kinetic_energy(m, g, rho) +
         eps * m.b * correlation_energy(m, g, rho) -
         eps * m.Z * attraction_energy(g, rho);
}

}  // namespace

CollapseReport single_nucleus_collapse(const GbEvaluator& ev, double t,
                                       const std::vector<double>& eps_ladder,
                                       double r_min, double r_max, int nodes,
                                       const SolveOptions& opts) {
  if (!(t > 0.0)) throw ConfigError("single_nucleus_collapse: t must be > 0");
  const std::vector<double> ladder = descending_unique(eps_ladder);
  const Model& m = ev.model();
  const ScalingMap sm = scaling_map(m);
  const RadialGrid g =
      make_log_grid(r_min * sm.length_scale, r_max * sm.length_scale,
                    static_cast<std::size_t>(nodes));
  const SolveResult sol = solve_constrained(m, g, t, opts);
  if (!sol.converged)
    throw NumericalError(
        "single_nucleus_collapse: base solve did not converge");

  CollapseReport rep;
  rep.direct_energy = sol.energy;
  rep.reference = ev.value(t);
  rep.concentration_ok = true;
  const double scale = std::max(std::abs(rep.direct_energy), 1e-300);
  for (double eps : ladder) {
    const RadialDensity pushed = pushforward_scale(g, sol.rho, 1.0 / eps);
    CollapseRow row;
    row.eps = eps;
    row.g_eps = rescaled_energy(m, eps, pushed.grid, pushed.values);
    const double ball = 10.0 * eps * sm.length_scale;
    for (std::size_t i = 0; i < pushed.grid.size(); ++i)
      if (pushed.grid.r[i] > ball)
        row.mass_outside += pushed.grid.wv[i] * pushed.values[i];
    rep.max_rel_spread =
        std::max(rep.max_rel_spread,
                 std::abs(row.g_eps - rep.direct_energy) / scale);
    if (row.mass_outside > 1e-3 * t) rep.concentration_ok = false;
    rep.rows.push_back(row);
  }
  rep.reference_gap = std::abs(rep.direct_energy - rep.reference) /
                      std::max(std::abs(rep.reference), 1e-300);
  rep.constant_ok = rep.max_rel_spread <= 1e-6;
  rep.reference_ok = rep.reference_gap <= 1e-6;
  return rep;
}

double direct_epsilon_solve(const Model& m, double eps, double t,
                            double r_min, double r_max, int nodes,
                            const SolveOptions& opts) {
  if (!(eps > 0.0)) throw ConfigError("direct_epsilon_solve: eps must be > 0");
  Model scaled = m;
  scaled.c_kin *= eps * eps;  // eps^2 T
  scaled.b *= eps;            // eps b C
  scaled.Z *= eps;            // eps Z U0
  const ScalingMap sm = scaling_map(m);
  const RadialGrid g = make_log_grid(eps * sm.length_scale * r_min,
                                     eps * sm.length_scale * r_max,
                                     static_cast<std::size_t>(nodes));
  const SolveResult sol = solve_constrained(scaled, g, t, opts);
  if (!sol.converged)
    throw NumericalError("direct_epsilon_solve: solve did not converge");
  return sol.energy;
}

EpsilonReport recovery_energy(const RecoverySequenceSpec& spec,
                              const std::vector<GbEvaluator>* evaluators) {
  const NucleiConfig& cfg = spec.config;
  validate_config(cfg);
  const std::size_t M = cfg.Z.size();
  if (cfg.X.size() != M)
    throw ConfigError("recovery_energy: one position per nucleus is required");
  if (spec.alpha.size() != M)
    throw ConfigError("recovery_energy: one mass per nucleus is required");
  double alpha_sum = 0.0;
  for (double a : spec.alpha) {
    if (a < 0.0) throw ConfigError("recovery_energy: masses must be >= 0");
    alpha_sum += a;
  }
  if (alpha_sum > cfg.m * (1.0 + 1e-12) + 1e-12)
    throw ConfigError(
        "recovery_energy: per-nucleus masses exceed the electron budget");
  if (evaluators && evaluators->size() != M)
    throw ConfigError("recovery_energy: need one evaluator per nucleus");

  std::vector<Model> models;
  for (std::size_t i = 0; i < M; ++i)
    models.push_back(make_model(cfg.family, cfg.b, cfg.Z[i], cfg.beta));

  // --- carriers -----------------------------------------------------------
  EpsilonReport rep;
  if (!spec.carriers.empty()) {
    if (spec.carriers.size() != M)
      throw ConfigError("recovery_energy: need one carrier per nucleus");
    rep.carriers = spec.carriers;
  } else {
    for (std::size_t i = 0; i < M; ++i) {
      Carrier c;
      const ScalingMap smi = scaling_map(models[i]);
      c.grid = make_log_grid(spec.r_min * smi.length_scale,
                             spec.r_max * smi.length_scale,
                             static_cast<std::size_t>(spec.nodes));
      c.rho.assign(c.grid.size(), 0.0);
      if (spec.alpha[i] > 0.0) {
        SolveResult sol =
            solve_constrained(models[i], c.grid, spec.alpha[i], spec.opts);
        if (!sol.converged)
          throw NumericalError("recovery_energy: carrier solve " +
                               std::to_string(i + 1) + " did not converge");
        for (std::size_t j = 0; j < sol.rho.size(); ++j)
          c.rho[j] = sol.rho[j] > spec.support_floor ? sol.rho[j] : 0.0;
      }
      c.mass = mass(c.grid, c.rho);
      c.radius = measured_support_radius(c.grid, c.rho, 0.0);
      c.energy = total_energy(models[i], c.grid, c.rho);
      rep.carriers.push_back(std::move(c));
    }
  }

  // --- optional fixed background at the origin -----------------------------
  double min_center_norm = std::numeric_limits<double>::infinity();
  for (const auto& x : cfg.X) min_center_norm = std::min(min_center_norm, norm3(x));
  RadialGrid bg_grid;
  std::vector<double> bg_rho;
  double bg_T = 0.0, bg_C = 0.0, bg_radius = 0.0;
  if (spec.with_background) {
    if (!(spec.background_mass > 0.0))
      throw ConfigError("recovery_energy: background mass must be > 0");
    if (min_center_norm <= 0.0)
      throw ConfigError(
          "recovery_energy: a background needs every nucleus away from the "
          "origin");
    bg_radius = spec.background_radius > 0.0 ? spec.background_radius
                                             : 0.4 * min_center_norm;
    if (bg_radius >= min_center_norm)
      throw ConfigError(
          "recovery_energy: background support must not reach the nearest "
          "nucleus");
    bg_grid = make_log_grid(spec.r_min, bg_radius,
                            static_cast<std::size_t>(spec.nodes));
    bg_rho.resize(bg_grid.size());
    for (std::size_t j = 0; j < bg_grid.size(); ++j) {
      const double x = bg_grid.r[j] / bg_radius;
      const double w = 1.0 - x * x;
      bg_rho[j] = w > 0.0 ? w * w : 0.0;
    }
    const double base = mass(bg_grid, bg_rho);
    for (double& v : bg_rho) v *= spec.background_mass / base;
    rep.background_mass = mass(bg_grid, bg_rho);
    bg_T = kinetic_energy(models[0], bg_grid, bg_rho);
    bg_C = correlation_energy(models[0], bg_grid, bg_rho);
  }

  // --- references ----------------------------------------------------------
  rep.reference = 0.0;
  for (const auto& c : rep.carriers) rep.reference += c.energy;
  rep.reference_table = kNaN;
  if (evaluators) {
    rep.reference_table = 0.0;
    for (std::size_t i = 0; i < M; ++i)
      rep.reference_table += (*evaluators)[i].value(spec.alpha[i]);
  }

  // --- ladder ---------------------------------------------------------------
  std::vector<double> ladder = spec.eps_ladder;
  if (ladder.empty()) {
    double eps_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = i + 1; j < M; ++j) {
        const double rr = rep.carriers[i].radius + rep.carriers[j].radius;
        if (rr > 0.0)
          eps_max = std::min(eps_max, dist3(cfg.X[i], cfg.X[j]) / rr);
      }
    if (spec.with_background)
      for (std::size_t i = 0; i < M; ++i)
        if (rep.carriers[i].radius > 0.0)
          eps_max = std::min(eps_max, (norm3(cfg.X[i]) - bg_radius) /
                                          rep.carriers[i].radius);
    double eps0 = std::isfinite(eps_max) ? 0.8 * eps_max : 1.0;
    eps0 = std::min(eps0, 1.0);
    if (!(eps0 > 0.0))
      throw NumericalError(
          "recovery_energy: no positive epsilon keeps the bumps disjoint");
    for (int k = 0; k < 6; ++k) ladder.push_back(eps0 * std::pow(0.5, k));
  }
  ladder = descending_unique(ladder);

  const double c_corr = models[0].c_corr;
  const bool coulomb = is_coulomb_correlation(models[0]);
  const double ref_scale = 1.0 + std::abs(rep.reference);

  // --- rows -----------------------------------------------------------------
  for (double eps : ladder) {
    // Disjointness: every rescaled bump must clear the other bumps, the
    // nuclei it is not attached to, and the background.
    for (std::size_t i = 0; i < M; ++i) {
      if (rep.carriers[i].mass <= 0.0) continue;
      for (std::size_t j = i + 1; j < M; ++j) {
        if (rep.carriers[j].mass <= 0.0) continue;
        const double d = dist3(cfg.X[i], cfg.X[j]);
        if (eps * (rep.carriers[i].radius + rep.carriers[j].radius) >= d)
          throw NumericalError(
              "recovery_energy: bumps " + std::to_string(i + 1) + " and " +
              std::to_string(j + 1) + " overlap at eps=" + format_g17(eps) +
              "; shrink the bump support or separate the nuclei");
      }
      if (spec.with_background &&
          eps * rep.carriers[i].radius + bg_radius >= norm3(cfg.X[i]))
        throw NumericalError(
            "recovery_energy: bump " + std::to_string(i + 1) +
            " overlaps the background at eps=" + format_g17(eps) +
            "; shrink the bump support or the background");
    }

    RecoveryRow row;
    row.eps = eps;
    double own = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      if (rep.carriers[i].mass <= 0.0) continue;
      const RadialDensity pushed =
          pushforward_scale(rep.carriers[i].grid, rep.carriers[i].rho,
                            1.0 / eps);
      own += rescaled_energy(models[i], eps, pushed.grid, pushed.values);
      row.mass_total += mass(pushed.grid, pushed.values);
    }

    double attr = 0.0, attr_lo = 0.0, attr_hi = 0.0;
    for (std::size_t k = 0; k < M; ++k)
      for (std::size_t i = 0; i < M; ++i) {
        if (i == k || rep.carriers[i].mass <= 0.0) continue;
        const double d = dist3(cfg.X[i], cfg.X[k]);
        const double q = cfg.Z[k] * rep.carriers[i].mass;
        const double spread = eps * rep.carriers[i].radius;
        attr += q / d;
        attr_lo += q / (d + spread);
        attr_hi += q / (d - spread);
      }
    double corr_raw = 0.0, corr_lo = 0.0, corr_hi = 0.0;
    if (coulomb)
      for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i + 1; j < M; ++j) {
          if (rep.carriers[i].mass <= 0.0 || rep.carriers[j].mass <= 0.0)
            continue;
          const double d = dist3(cfg.X[i], cfg.X[j]);
          const double q = 2.0 * rep.carriers[i].mass * rep.carriers[j].mass;
          const double spread =
              eps * (rep.carriers[i].radius + rep.carriers[j].radius);
          corr_raw += q / d;
          corr_lo += q / (d + spread);
          corr_hi += q / (d - spread);
        }
    double bg_terms_eps2 = 0.0, bg_corr = 0.0;
    if (spec.with_background) {
      for (std::size_t k = 0; k < M; ++k) {
        const double nk = norm3(cfg.X[k]);
        const double q = cfg.Z[k] * rep.background_mass;
        attr += q / nk;
        attr_lo += q / (nk + bg_radius);
        attr_hi += q / (nk - bg_radius);
      }
      if (coulomb)
        for (std::size_t i = 0; i < M; ++i) {
          if (rep.carriers[i].mass <= 0.0) continue;
          const double ni = norm3(cfg.X[i]);
          const double q = 2.0 * rep.carriers[i].mass * rep.background_mass;
          const double spread = eps * rep.carriers[i].radius + bg_radius;
          corr_raw += q / ni;
          corr_lo += q / (ni + spread);
          corr_hi += q / (ni - spread);
        }
      bg_terms_eps2 = eps * eps * bg_T;
      bg_corr = eps * cfg.b * bg_C;
      row.mass_total += rep.background_mass;
    }

    row.cross_attraction = eps * attr;
    row.cross_correlation = eps * cfg.b * c_corr * corr_raw + bg_corr;
    row.corridor_attraction_lo = eps * attr_lo;
    row.corridor_attraction_hi = eps * attr_hi;
    row.within_corridor = attr_lo <= attr && attr <= attr_hi &&
                          corr_lo <= corr_raw && corr_raw <= corr_hi;
    row.g_eps =
        own + bg_terms_eps2 + row.cross_correlation - row.cross_attraction;
    row.gap = row.g_eps - rep.reference;
    row.gap_vs_table =
        evaluators ? row.g_eps - rep.reference_table : kNaN;
    rep.rows.push_back(row);
  }

  // --- summary flags ---------------------------------------------------------
  rep.gaps_decreasing = true;
  for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
    if (std::abs(rep.rows[k + 1].gap) >
        std::abs(rep.rows[k].gap) + 1e-12 * ref_scale)
      rep.gaps_decreasing = false;
  rep.mass_conserved = true;
  double expected_mass = rep.background_mass;
  for (const auto& c : rep.carriers) expected_mass += c.mass;
  for (const auto& row : rep.rows)
    if (std::abs(row.mass_total - expected_mass) >
        1e-9 * (1.0 + expected_mass))
      rep.mass_conserved = false;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n_fit = 0;
  for (const auto& row : rep.rows) {
    if (std::abs(row.gap) <= 1e-12 * ref_scale) continue;
    const double x = std::log(row.eps), y = std::log(std::abs(row.gap));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n_fit;
  }
  if (n_fit >= 3) {
    const double den = n_fit * sxx - sx * sx;
    if (std::abs(den) > 0.0) {
      rep.fitted_slope = (n_fit * sxy - sx * sy) / den;
      rep.slope_meaningful = true;
    }
  }
  return rep;
}

}  // namespace dftlim
