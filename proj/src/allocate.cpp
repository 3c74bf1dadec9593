#include "dftlim/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dftlim/errors.hpp"

namespace dftlim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string nucleus_tag(std::size_t k) {
  return "nucleus " + std::to_string(k + 1);
}

/// Sum of per-nucleus filled masses at multiplier lambda (clamped to table
/// coverage; final answers are coverage-checked separately).
double filled_mass_sum(const std::vector<GbEvaluator>& evs, double lambda,
                       std::vector<double>* alpha_out = nullptr) {
  double total = 0.0;
  for (std::size_t k = 0; k < evs.size(); ++k) {
    const double a = lambda == 0.0
                         ? evs[k].saturation_alpha()
                         : evs[k].alpha_for_slope(-lambda, true);
    if (alpha_out) (*alpha_out)[k] = a;
    total += a;
  }
  return total;
}

KktReport certify(const NucleiConfig& cfg,
                  const std::vector<GbEvaluator>& evs,
                  const std::vector<double>& alpha, double lambda,
                  double tol) {
  KktReport rep;
  rep.ok = true;
  const double m = cfg.m;
  double total = 0.0;
  for (double a : alpha) total += a;

  rep.feasibility_excess = std::max(0.0, total - m);
  if (rep.feasibility_excess > 1e-9 * (1.0 + m)) {
    rep.ok = false;
    rep.notes.push_back("total mass exceeds the budget");
  }

  rep.complementarity = lambda * std::max(0.0, m - total);
  if (rep.complementarity > tol) {
    rep.ok = false;
    rep.notes.push_back("positive multiplier with unassigned mass");
  }

  for (std::size_t k = 0; k < evs.size(); ++k) {
    const double cap = evs[k].saturation_alpha();
    if (alpha[k] < -1e-12 ||
        (std::isfinite(cap) && alpha[k] > cap * (1.0 + 1e-9) + 1e-12)) {
      rep.caps_respected = false;
      rep.ok = false;
      rep.notes.push_back(nucleus_tag(k) + ": mass outside [0, cap]");
    }
    if (alpha[k] <= 1e-14 * (1.0 + m)) continue;  // stationarity vacuous
    const double slope = evs[k].derivative(alpha[k]);
    const bool cap_active =
        std::isfinite(cap) && alpha[k] >= cap * (1.0 - 1e-9);
    if (cap_active) {
      // At an active cap the marginal energy only needs to dominate -lambda.
      if (slope < -lambda - tol) {
        rep.ok = false;
        rep.notes.push_back(nucleus_tag(k) +
                            ": marginal energy below -lambda at the cap");
      }
      continue;
    }
    const double resid = std::abs(slope + lambda) / (1.0 + lambda);
    rep.max_stationarity = std::max(rep.max_stationarity, resid);
    if (resid > tol) {
      rep.ok = false;
      rep.notes.push_back(nucleus_tag(k) + ": stationarity residual " +
                          std::to_string(resid));
    }
  }
  return rep;
}

}  // namespace

void validate_config(const NucleiConfig& cfg) {
  std::vector<std::string> bad;
  const std::size_t M = cfg.Z.size();
  if (M < 1) bad.push_back("at least one nucleus is required");
  for (std::size_t k = 0; k < M; ++k)
    if (!(cfg.Z[k] > 0.0))
      bad.push_back(nucleus_tag(k) + ": charge must be > 0");
  if (!(cfg.b > 0.0)) bad.push_back("b must be > 0");
  if (cfg.m < 0.0) bad.push_back("m must be >= 0");
  try {
    (void)make_model(cfg.family, cfg.b > 0 ? cfg.b : 1.0, 1.0, cfg.beta);
  } catch (const ConfigError& e) {
    bad.push_back(e.what());
  }
  if (!cfg.X.empty()) {
    if (cfg.X.size() != M)
      bad.push_back("positions must be absent or one per nucleus");
    for (std::size_t i = 0; i < cfg.X.size(); ++i)
      for (std::size_t j = i + 1; j < cfg.X.size(); ++j) {
        const double dx = cfg.X[i][0] - cfg.X[j][0];
        const double dy = cfg.X[i][1] - cfg.X[j][1];
        const double dz = cfg.X[i][2] - cfg.X[j][2];
        if (dx * dx + dy * dy + dz * dz == 0.0)
          bad.push_back(nucleus_tag(i) + " and " + nucleus_tag(j) +
                        " share a position");
      }
  }
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& s : bad) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

AllocationResult allocate(const NucleiConfig& cfg,
                          const std::vector<GbEvaluator>& evs, double tol) {
  validate_config(cfg);
  const std::size_t M = cfg.Z.size();
  if (evs.size() != M)
    throw ConfigError("allocate: need exactly one evaluator per nucleus");
  for (std::size_t k = 0; k < M; ++k) {
    const Model& em = evs[k].model();
    if (std::abs(em.Z - cfg.Z[k]) > 1e-12 * (1.0 + cfg.Z[k]) ||
        std::abs(em.b - cfg.b) > 1e-12 * (1.0 + cfg.b) ||
        family_name(em) != family_name(make_model(cfg.family, cfg.b,
                                                  cfg.Z[k], cfg.beta)))
      throw ConfigError("allocate: " + nucleus_tag(k) +
                        ": evaluator does not match the configuration");
  }

  AllocationResult res;
  res.alpha.assign(M, 0.0);

  if (cfg.m == 0.0) {
    res.kkt = certify(cfg, evs, res.alpha, 0.0, tol);
    return res;
  }

  // lambda = 0 first: fill every nucleus to its cap if the budget allows.
  double cap_sum = 0.0;
  bool caps_finite = true;
  for (const auto& ev : evs) {
    const double c = ev.saturation_alpha();
    if (!std::isfinite(c)) {
      caps_finite = false;
      break;
    }
    cap_sum += c;
  }
  if (caps_finite && cap_sum <= cfg.m) {
    for (std::size_t k = 0; k < M; ++k) res.alpha[k] = evs[k].saturation_alpha();
    res.lambda = 0.0;
  } else {
    // Bracket: start from the most negative tabulated marginal energy and
    // double until the filled mass fits the budget.
    double hi = 0.0;
    for (const auto& ev : evs) {
      const double a_min = ev.interp().t_min() / ev.mass_scale();
      const double d = ev.derivative(a_min);
      if (std::isfinite(d)) hi = std::max(hi, -d);
    }
    if (!(hi > 0.0)) hi = 1.0;
    int grow = 0;
    while (filled_mass_sum(evs, hi) > cfg.m && grow++ < 400) hi *= 2.0;
    if (grow > 400)
      throw NumericalError("allocate: could not bracket the multiplier");
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-18 * (1.0 + hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      (filled_mass_sum(evs, mid) > cfg.m ? lo : hi) = mid;
    }
    filled_mass_sum(evs, hi, &res.alpha);  // hi side keeps the sum feasible
    res.lambda = hi;
    for (std::size_t k = 0; k < M; ++k) {
      if (std::isfinite(evs[k].saturation_alpha())) continue;
      if (res.alpha[k] >= evs[k].alpha_max_covered() * (1.0 - 1e-9))
        throw ConfigError("allocate: " + nucleus_tag(k) +
                          ": optimal mass lies beyond the tabulated range; "
                          "extend the LTable");
    }
  }

  res.total_mass = 0.0;
  for (double a : res.alpha) res.total_mass += a;
  res.leftover = cfg.m - res.total_mass;
  res.ionized = res.leftover > 1e-9 * std::max(1.0, cfg.m);
  res.energy = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    try {
      res.energy += evs[k].value(res.alpha[k]);
    } catch (const ConfigError& e) {
      throw ConfigError("allocate: " + nucleus_tag(k) + ": " + e.what());
    }
  }
  res.kkt = certify(cfg, evs, res.alpha, res.lambda, tol);
  return res;
}

std::vector<double> closed_form_tfc0(const std::vector<double>& Z, double m) {
  if (Z.empty()) throw ConfigError("closed_form_tfc0: no charges");
  if (m < 0.0) throw ConfigError("closed_form_tfc0: m must be >= 0");
  double sum_cubes = 0.0;
  for (double z : Z) {
    if (!(z > 0.0)) throw ConfigError("closed_form_tfc0: charges must be > 0");
    sum_cubes += z * z * z;
  }
  std::vector<double> alpha(Z.size());
  for (std::size_t k = 0; k < Z.size(); ++k)
    alpha[k] = m * (Z[k] * Z[k] * Z[k]) / sum_cubes;
  return alpha;
}

double ionization_threshold(const GbEvaluator& evaluator) {
  return evaluator.saturation_alpha();
}

FillingOrderReport relative_filling_order(const AllocationResult& result,
                                          const NucleiConfig& cfg) {
  FillingOrderReport rep;
  if (cfg.Z.size() != 2 || result.alpha.size() != 2) return rep;
  const Model probe = make_model(cfg.family, cfg.b, cfg.Z[0], cfg.beta);
  if (!is_coulomb_correlation(probe) || result.ionized) return rep;
  rep.applicable = true;
  const std::size_t small = cfg.Z[0] <= cfg.Z[1] ? 0 : 1;
  const std::size_t large = 1 - small;
  rep.ratio_small = result.alpha[small] / cfg.Z[small];
  rep.ratio_large = result.alpha[large] / cfg.Z[large];
  if (std::abs(cfg.Z[0] - cfg.Z[1]) <= 1e-12 * (1.0 + cfg.Z[0]))
    rep.holds = std::abs(rep.ratio_small - rep.ratio_large) <=
                1e-6 * (1.0 + std::abs(rep.ratio_large));
  else
    rep.holds = rep.ratio_small < rep.ratio_large;
  return rep;
}

}  // namespace dftlim
