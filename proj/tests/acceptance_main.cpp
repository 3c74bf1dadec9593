// Acceptance gate: one [PASS]/[FAIL] line per numbered criterion, pinned
// tolerances, desk scale (4096-node grid, r_max = 50). Exit code 0 only if
// every criterion passes.

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dftlim/allocate.hpp"
#include "dftlim/errors.hpp"
#include "dftlim/functionals.hpp"
#include "dftlim/gamma.hpp"
#include "dftlim/gb.hpp"
#include "dftlim/grid.hpp"
#include "dftlim/io.hpp"
#include "dftlim/ltable.hpp"
#include "dftlim/model.hpp"
#include "dftlim/single_nucleus.hpp"

using namespace dftlim;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNodes = 4096;
constexpr double kRmin = 1e-6;
constexpr double kRmax = 50.0;
const char* kCache = "./acceptance-cache";

int g_failures = 0;

void report(int id, const std::string& label, bool ok,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", id,
              label.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

template <typename F>
void run(int id, const std::string& label, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, label, false, std::string("exception: ") + e.what());
  }
}

std::vector<double> random_mix(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> width(0.3, 3.0);
  std::uniform_real_distribution<double> amp(0.1, 2.0);
  const double w1 = width(rng), w2 = width(rng), a1 = amp(rng), a2 = amp(rng);
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r[i];
    rho[i] = a1 * std::exp(-r * r / (w1 * w1)) + a2 * std::exp(-r / w2);
  }
  return rho;
}

// Criterion 9 registry: every table audit and KKT certificate seen anywhere
// in this run.
std::vector<std::pair<std::string, bool>> g_audits;
std::vector<std::pair<std::string, bool>> g_kkts;

std::shared_ptr<const LInterp> desk_interp(const std::string& family) {
  auto li = build_l_interp(kCache, family, 5.0 / 3.0, kRmin, kRmax, kNodes);
  // build_l_interp already audits (it throws on failure); record the result.
  g_audits.emplace_back(family + " desk table",
                        audit_l_table(li->table()).ok);
  return li;
}

}  // namespace

int main() {
  std::printf("acceptance gate: desk scale %d nodes, r in [%g, %g]\n", kNodes,
              kRmin, kRmax);
  std::fflush(stdout);

  // ------------------------------------------------------------------ 1
  run(1, "Hartree identity, two quadrature routes", [] {
    const RadialGrid g = make_log_grid(kRmin, kRmax, kNodes);
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto rho = random_mix(g, rng);
      const double fast = coulomb_raw(g, rho);
      const double brute = coulomb_raw_bruteforce(g, rho);
      worst = std::max(worst, std::abs(fast - brute) / std::abs(brute));
    }
    report(1, "Hartree identity, two quadrature routes", worst <= 1e-6,
           "max relative difference " + format_g17(worst) + " (tol 1e-6)");
  });

  // ------------------------------------------------------------------ 2
  run(2, "dilation scaling of T, C, U0", [] {
    const RadialGrid g = make_log_grid(kRmin, kRmax, kNodes);
    std::mt19937_64 rng(202);
    const auto rho = random_mix(g, rng);
    double worst = 0.0;
    for (const char* fam : {"tf_c0", "tf_d", "vw_c0", "vw_d"}) {
      const Model m = make_model(fam, 1.0, 1.0);
      const double T = kinetic_energy(m, g, rho);
      const double C = correlation_energy(m, g, rho);
      const double U = attraction_energy(g, rho);
      for (double s : {0.3, 0.5, 2.0, 3.0}) {
        const RadialDensity p = pushforward_scale(g, rho, s);
        worst = std::max(worst,
                         std::abs(kinetic_energy(m, p.grid, p.values) / (s * s * T) - 1.0));
        worst = std::max(worst,
                         std::abs(correlation_energy(m, p.grid, p.values) / (s * C) - 1.0));
        worst = std::max(worst,
                         std::abs(attraction_energy(p.grid, p.values) / (s * U) - 1.0));
      }
    }
    report(2, "dilation scaling of T, C, U0", worst <= 1e-6,
           "max relative drift " + format_g17(worst) + " (tol 1e-6)");
  });

  // ------------------------------------------------------------------ 3
  run(3, "pointwise Euler-Lagrange inversion residual", [] {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> rhs(0.0, 100.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double s = rhs(rng);
      const double u = std::cbrt(solve_tf_pointwise_inversion(s));
      worst = std::max(worst, std::abs((5.0 / 3.0) * u * u + u - s));
    }
    report(3, "pointwise Euler-Lagrange inversion residual", worst <= 1e-12,
           "max residual " + format_g17(worst) + " over 1e4 draws (tol 1e-12)");
  });

  // ------------------------------------------------------------------ 4
  run(4, "proportional allocation for the local-power family", [] {
    const auto li = desk_interp("tf_c0");
    auto evaluators = [&](const std::vector<double>& Z) {
      std::vector<GbEvaluator> evs;
      for (double z : Z) evs.emplace_back("tf_c0", 1.0, z, 5.0 / 3.0, li);
      return evs;
    };
    NucleiConfig ex;
    ex.family = "tf_c0";
    ex.Z = {1.0, 2.0};
    ex.m = 3.0;
    const AllocationResult res = allocate(ex, evaluators(ex.Z));
    g_kkts.emplace_back("allocation Z=(1,2) m=3", res.kkt.ok);
    double worst = std::max(std::abs(res.alpha[0] - 1.0 / 3.0),
                            std::abs(res.alpha[1] - 8.0 / 3.0));
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> m_count(1, 5);
    std::uniform_real_distribution<double> charge(0.5, 2.5);
    for (int rep = 0; rep < 20; ++rep) {
      NucleiConfig cfg;
      cfg.family = "tf_c0";
      const int M = m_count(rng);
      double zc = 0.0;
      for (int k = 0; k < M; ++k) {
        cfg.Z.push_back(charge(rng));
        zc += cfg.Z.back() * cfg.Z.back() * cfg.Z.back();
      }
      std::uniform_real_distribution<double> budget(0.01 * zc, 1.5 * zc);
      cfg.m = budget(rng);
      const AllocationResult r = allocate(cfg, evaluators(cfg.Z));
      g_kkts.emplace_back("random allocation " + std::to_string(rep + 1),
                          r.kkt.ok);
      const auto oracle = closed_form_tfc0(cfg.Z, cfg.m);
      for (int k = 0; k < M; ++k)
        worst = std::max(worst, std::abs(r.alpha[std::size_t(k)] -
                                         oracle[std::size_t(k)]) /
                                    (1.0 + oracle[std::size_t(k)]));
    }
    report(4, "proportional allocation for the local-power family",
           worst <= 1e-3,
           "max deviation from m Z_k^3 / sum Z^3 is " + format_g17(worst) +
               " over the pinned example and 20 random configs (tol 1e-3)");
  });

  // ------------------------------------------------------------------ 5
  run(5, "ionization of the pointwise-kinetic Coulomb family", [] {
    const RadialGrid g = make_log_grid(kRmin, kRmax, kNodes);
    const Model m = make_model("tf_d", 1.0, 1.0);
    const SolveResult uncon = solve_unconstrained(m, g);
    const double mass_err = std::abs(uncon.t_achieved - 1.0);
    const auto li = desk_interp("tf_d");
    double theta_at_one = 0.0, secant_at_one = 0.0;
    for (const auto& row : li->table().rows)
      if (row.t == 1.0) {
        theta_at_one = row.theta;
        secant_at_one = row.lprime_diff;
      }
    NucleiConfig cfg;
    cfg.family = "tf_d";
    cfg.Z = {1.0, 2.0};
    cfg.m = 3.5;
    std::vector<GbEvaluator> evs;
    for (double z : cfg.Z) evs.emplace_back("tf_d", 1.0, z, 5.0 / 3.0, li);
    const AllocationResult res = allocate(cfg, evs);
    g_kkts.emplace_back("ionized allocation Z=(1,2) m=3.5", res.kkt.ok);
    const double alpha_err = std::max(std::abs(res.alpha[0] - 1.0),
                                      std::abs(res.alpha[1] - 2.0));
    const bool ok = mass_err <= 0.02 && std::abs(theta_at_one) <= 1e-3 &&
                    std::abs(secant_at_one) <= 1e-3 && res.ionized &&
                    alpha_err <= 1e-3;
    report(5, "ionization of the pointwise-kinetic Coulomb family", ok,
           "unconstrained mass 1" + std::string(uncon.t_achieved >= 1.0 ? "+" : "-") +
               format_g17(mass_err) + " (tol 0.02), |L'(1)| multiplier " +
               format_g17(std::abs(theta_at_one)) + " / secant " +
               format_g17(std::abs(secant_at_one)) +
               " (tol 1e-3), ionized=" + (res.ionized ? "true" : "false") +
               ", max|alpha_k - Z_k/b| " + format_g17(alpha_err) +
               " (tol 1e-3)");
  });

  // ------------------------------------------------------------------ 6
  run(6, "small-mass asymptote of the normalized value function", [] {
    const RadialGrid g = make_log_grid(1e-8, kRmax, kNodes);
    const Model m = make_model("tf_d", 1.0, 1.0);
    const double target = -3.0 * std::pow(kPi / 2.0, 4.0 / 3.0);  // -5.478
    double worst = 0.0;
    std::string detail;
    for (double t : {1e-3, 1e-4}) {
      const SolveResult sol = solve_constrained(m, g, t);
      if (!sol.converged) throw NumericalError("solve did not converge");
      const double ratio = sol.energy / std::cbrt(t);
      worst = std::max(worst, std::abs(ratio / target - 1.0));
      detail += "L(" + format_g17(t) + ")/t^{1/3} = " + format_g17(ratio) + "; ";
    }
    report(6, "small-mass asymptote of the normalized value function",
           worst <= 0.05,
           detail + "target " + format_g17(target) + ", worst gap " +
               format_g17(worst) + " (tol 5%)");
  });

  // ------------------------------------------------------------------ 7
  run(7, "far-field decay exponents and prefactor", [] {
    const RadialGrid g = make_log_grid(kRmin, kRmax, kNodes);
    std::string detail;
    bool ok = true;
    {
      const Model m = make_model("tf_d", 1.0, 1.0);
      const SolveResult sol = solve_unconstrained(m, g);
      const TailFit fit = fit_tail(g, sol.rho, 10.0, 30.0);
      const double pref = fixed_slope_prefactor(g, sol.rho, 10.0, 30.0, -6.0);
      const double pref_target = std::pow(3.0 / kPi, 3.0);
      const bool slope_ok = std::abs(fit.slope + 6.0) <= 0.3;
      const bool pref_ok = std::abs(pref / pref_target - 1.0) <= 0.2;
      ok = ok && slope_ok && pref_ok;
      detail += "pointwise+Coulomb slope " + format_g17(fit.slope) +
                " (target -6 +- 0.3), prefactor " + format_g17(pref) +
                " vs " + format_g17(pref_target) + " (tol 20%); ";
    }
    {
      const Model m = make_model("tf_c0", 1.0, 1.0);
      const SolveResult sol = solve_unconstrained(m, g);
      const TailFit fit = fit_tail(g, sol.rho, 10.0, 30.0);
      ok = ok && std::abs(fit.slope + 3.0) <= 0.3;
      detail += "pointwise+local slope " + format_g17(fit.slope) +
                " (target -3 +- 0.3); ";
    }
    for (double beta : {1.25, 5.0 / 3.0, 2.0}) {
      const Model m = make_model("vw_c0", 1.0, 1.0, beta);
      const SolveResult sol = solve_unconstrained(m, g);
      const TailFit fit = fit_tail(g, sol.rho, 10.0, 30.0);
      ok = ok && std::abs(fit.slope + 3.0) <= 0.5;
      detail += "gradient(beta=" + format_g17(beta) + ")+local slope " +
                format_g17(fit.slope) + " (target -3 +- 0.5); ";
    }
    report(7, "far-field decay exponents and prefactor", ok, detail);
  });

  // ------------------------------------------------------------------ 8
  run(8, "support bound by the inverse marginal energy", [] {
    const RadialGrid g = make_log_grid(kRmin, kRmax, kNodes);
    const Model m = make_model("tf_d", 1.0, 1.0);
    bool ok = true;
    std::string detail;
    for (double t : {0.3, 0.5, 0.8}) {
      const SolveResult sol = solve_constrained(m, g, t);
      if (!sol.converged) throw NumericalError("solve did not converge");
      const SupportReport sup = support_radius(sol);
      // one grid cell at the measured support radius
      double cell = 0.0;
      for (std::size_t i = 0; i + 1 < g.size(); ++i)
        if (g.r[i] <= sup.radius && sup.radius <= g.r[i + 1])
          cell = g.r[i + 1] - g.r[i];
      const double bound = 1.0 / sol.theta + cell;
      ok = ok && sup.radius <= bound;
      detail += "t=" + format_g17(t) + ": support " + format_g17(sup.radius) +
                " vs 1/|L'| + cell " + format_g17(bound) + "; ";
    }
    report(8, "support bound by the inverse marginal energy", ok, detail);
  });

  // ------------------------------------------------------------------ 9
  run(9, "audits and certificates across the run", [] {
    bool ok = !g_audits.empty() && !g_kkts.empty();
    std::string detail = std::to_string(g_audits.size()) + " table audits, " +
                         std::to_string(g_kkts.size()) + " KKT certificates";
    for (const auto& [name, pass] : g_audits)
      if (!pass) {
        ok = false;
        detail += "; audit failed: " + name;
      }
    for (const auto& [name, pass] : g_kkts)
      if (!pass) {
        ok = false;
        detail += "; certificate failed: " + name;
      }
    report(9, "audits and certificates across the run", ok, detail);
  });

  // ------------------------------------------------------------------ 10
  run(10, "limit structure: collapse constancy and recovery rate", [] {
    const auto li = desk_interp("tf_d");
    const GbEvaluator ev("tf_d", 1.0, 1.0, 5.0 / 3.0, li);
    const CollapseReport col = single_nucleus_collapse(
        ev, 0.5, {1.0, 1e-1, 1e-2, 1e-3}, kRmin, kRmax, kNodes);
    NucleiConfig cfg;
    cfg.family = "tf_d";
    cfg.Z = {1.0, 2.0};
    cfg.X = {{{0.0, 0.0, 0.0}}, {{5.0, 0.0, 0.0}}};
    cfg.m = 3.0;
    RecoverySequenceSpec spec;
    spec.config = cfg;
    spec.alpha = {1.0, 2.0};
    spec.r_min = kRmin;
    spec.r_max = kRmax;
    spec.nodes = kNodes;
    std::vector<GbEvaluator> evs;
    for (double z : cfg.Z) evs.emplace_back("tf_d", 1.0, z, 5.0 / 3.0, li);
    const EpsilonReport rec = recovery_energy(spec, &evs);
    const bool slope_ok =
        rec.slope_meaningful && std::abs(rec.fitted_slope - 1.0) <= 0.2;
    const bool ok = col.constant_ok && col.reference_ok &&
                    col.concentration_ok && slope_ok;
    report(10, "limit structure: collapse constancy and recovery rate", ok,
           "collapse spread " + format_g17(col.max_rel_spread) +
               " (tol 1e-6), reference gap " + format_g17(col.reference_gap) +
               " (tol 1e-6), recovery slope " + format_g17(rec.fitted_slope) +
               " (target 1 +- 0.2)");
  });

  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
