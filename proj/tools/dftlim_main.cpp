// Command-line front end: run solves, build/cache tables, evaluate the
// rescaled cell energy, allocate electrons, compute ionization thresholds,
// run the limit-structure checks, and emit CSV/JSON artifacts.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.
// All artifacts are written atomically (temp file + rename) with 17
// significant digits, so identical runs produce byte-identical files.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

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

namespace {

using namespace dftlim;

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string family = "tf_c0";
  double beta = 5.0 / 3.0;
  double b = 1.0;
  std::vector<double> Z;
  std::vector<std::string> x_raw;  ///< one "x,y,z" triple per nucleus
  double m = 0.0;
  double t = 0.0;
  double r_min = 1e-6;
  double r_max = 50.0;
  int nodes = 2048;
  double tol = 5e-3;  ///< certificate / audit tolerance
  std::string cache_dir;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 1u;
  std::vector<double> eps;
  std::vector<double> alpha;
  std::vector<double> t_values;
  bool unconstrained = false;
  bool background = false;
  double background_mass = 0.0;
  double background_radius = 0.0;
  int threads = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(s), &used);
    if (used != trim(s).size())
      throw ConfigError(what + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse number '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ','))
    if (!trim(tok).empty()) out.push_back(parse_double(tok, what));
  return out;
}

std::array<double, 3> parse_triple(const std::string& s) {
  const std::vector<double> v = parse_list(s, "position");
  if (v.size() != 3)
    throw ConfigError("position '" + s + "' must have exactly 3 components");
  return {v[0], v[1], v[2]};
}

/// Applies "key = value" settings from a flat config file. CLI flags given
/// alongside override these values (the file is applied before parsing).
void apply_config_file(RunConfig& cfg, const std::string& path) {
  const auto kv = parse_config_text(read_text_file(path));
  std::vector<std::string> bad;
  for (const auto& [key, value] : kv) {
    if (key == "model") cfg.family = value;
    else if (key == "beta") cfg.beta = parse_double(value, key);
    else if (key == "b") cfg.b = parse_double(value, key);
    else if (key == "z") cfg.Z = parse_list(value, key);
    else if (key == "x") {
      cfg.x_raw.clear();
      for (const auto& tok : split(value, ';'))
        if (!trim(tok).empty()) cfg.x_raw.push_back(trim(tok));
    } else if (key == "m") cfg.m = parse_double(value, key);
    else if (key == "t") cfg.t = parse_double(value, key);
    else if (key == "rmin") cfg.r_min = parse_double(value, key);
    else if (key == "rmax") cfg.r_max = parse_double(value, key);
    else if (key == "nodes") cfg.nodes = int(parse_double(value, key));
    else if (key == "tol") cfg.tol = parse_double(value, key);
    else if (key == "cache-dir") cfg.cache_dir = value;
    else if (key == "out") cfg.out = value;
    else if (key == "format") cfg.format = value;
    else if (key == "seed") cfg.seed = std::uint64_t(parse_double(value, key));
    else if (key == "eps") cfg.eps = parse_list(value, key);
    else if (key == "alpha") cfg.alpha = parse_list(value, key);
    else if (key == "t-values") cfg.t_values = parse_list(value, key);
    else if (key == "unconstrained") cfg.unconstrained = value == "true" || value == "1";
    else if (key == "background") cfg.background = value == "true" || value == "1";
    else if (key == "background-mass") cfg.background_mass = parse_double(value, key);
    else if (key == "background-radius") cfg.background_radius = parse_double(value, key);
    else if (key == "threads") cfg.threads = int(parse_double(value, key));
    else bad.push_back(key);
  }
  if (!bad.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg);
  }
}

/// Collects every violation at once; throws ConfigError listing them.
void validate_run_config(const RunConfig& cfg, std::size_t min_nuclei,
                         std::size_t max_nuclei) {
  std::vector<std::string> bad;
  try {
    (void)make_model(cfg.family, 1.0, 1.0,
                     cfg.beta >= 1.25 && cfg.beta <= 2.0 ? cfg.beta : 5.0 / 3.0);
  } catch (const ConfigError& e) {
    bad.push_back(e.what());
  }
  if (!(cfg.beta >= 1.25 && cfg.beta <= 2.0))
    bad.push_back("beta must lie in [5/4, 2]");
  if (!(cfg.b > 0.0)) bad.push_back("b must be > 0");
  if (cfg.m < 0.0) bad.push_back("m must be >= 0");
  if (cfg.t < 0.0) bad.push_back("t must be >= 0");
  if (!(cfg.r_min > 0.0 && cfg.r_min < cfg.r_max))
    bad.push_back("grid needs 0 < rmin < rmax");
  if (cfg.nodes < 64) bad.push_back("nodes must be >= 64");
  if (!(cfg.tol > 0.0)) bad.push_back("tol must be > 0");
  if (cfg.format != "json" && cfg.format != "csv")
    bad.push_back("format must be json or csv");
  if (cfg.Z.size() < min_nuclei)
    bad.push_back("need at least " + std::to_string(min_nuclei) +
                  " charge(s) via --z");
  if (cfg.Z.size() > max_nuclei)
    bad.push_back("this command takes at most " + std::to_string(max_nuclei) +
                  " charge(s)");
  for (double z : cfg.Z)
    if (!(z > 0.0)) bad.push_back("charges must be > 0");
  for (double e : cfg.eps)
    if (!(e > 0.0)) bad.push_back("eps entries must be > 0");
  for (double a : cfg.alpha)
    if (a < 0.0) bad.push_back("alpha entries must be >= 0");
  for (double t : cfg.t_values)
    if (!(t > 0.0)) bad.push_back("t-values entries must be > 0");
  if (!cfg.x_raw.empty() && cfg.x_raw.size() != cfg.Z.size())
    bad.push_back("--x must be given once per nucleus");
  for (const auto& s : cfg.x_raw) {
    try {
      (void)parse_triple(s);
    } catch (const ConfigError& e) {
      bad.push_back(e.what());
    }
  }
  if (cfg.background && !(cfg.background_mass > 0.0))
    bad.push_back("--background needs --background-mass > 0");
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& s : bad) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

std::vector<std::array<double, 3>> parse_positions(const RunConfig& cfg) {
  std::vector<std::array<double, 3>> X;
  for (const auto& s : cfg.x_raw) X.push_back(parse_triple(s));
  return X;
}

// ---------------------------------------------------------------------------
// JSON / CSV assembly (hand-rolled so every number is %.17g)
// ---------------------------------------------------------------------------

std::string jnum(double v) {
  return std::isfinite(v) ? format_g17(v) : std::string("null");
}

const char* jbool(bool b) { return b ? "true" : "false"; }

std::string jstr(const std::string& s) {
  std::string o = "\"";
  for (char c : s) {
    switch (c) {
      case '"': o += "\\\""; break;
      case '\\': o += "\\\\"; break;
      case '\n': o += "\\n"; break;
      case '\t': o += "\\t"; break;
      case '\r': o += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", int(c));
          o += buf;
        } else {
          o += c;
        }
    }
  }
  return o + "\"";
}

std::string jlist(const std::vector<double>& v) {
  std::string o = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    o += (i ? ", " : "") + jnum(v[i]);
  return o + "]";
}

std::string jstrlist(const std::vector<std::string>& v) {
  std::string o = "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    o += (i ? ", " : "") + jstr(v[i]);
  return o + "]";
}

/// Minimal ordered JSON object builder.
class Obj {
 public:
  Obj& raw(const std::string& key, const std::string& value) {
    items_.push_back(jstr(key) + ": " + value);
    return *this;
  }
  Obj& num(const std::string& key, double v) { return raw(key, jnum(v)); }
  Obj& integer(const std::string& key, long long v) {
    return raw(key, std::to_string(v));
  }
  Obj& str(const std::string& key, const std::string& v) {
    return raw(key, jstr(v));
  }
  Obj& boolean(const std::string& key, bool v) { return raw(key, jbool(v)); }
  std::string build(int indent = 0) const {
    const std::string pad(std::size_t(indent) + 2, ' ');
    const std::string close(std::size_t(indent), ' ');
    std::string o = "{\n";
    for (std::size_t i = 0; i < items_.size(); ++i)
      o += pad + items_[i] + (i + 1 < items_.size() ? ",\n" : "\n");
    return o + close + "}";
  }

 private:
  std::vector<std::string> items_;
};

std::string artifact_path(const RunConfig& cfg, const std::string& command,
                          const std::string& ext) {
  const std::string base =
      cfg.out.empty() ? "dftlim-" + command : cfg.out;
  return base + "." + ext;
}

void emit(const std::string& path, const std::string& content) {
  atomic_write_text(path, content);
  std::printf("wrote %s\n", path.c_str());
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

SolveOptions solver_options(const RunConfig&) { return SolveOptions{}; }

int cmd_solve_single(const RunConfig& cfg) {
  validate_run_config(cfg, 0, 1);
  const double Z = cfg.Z.empty() ? 1.0 : cfg.Z[0];
  const Model mdl = make_model(cfg.family, cfg.b, Z, cfg.beta);
  const RadialGrid g = make_log_grid(cfg.r_min, cfg.r_max,
                                     static_cast<std::size_t>(cfg.nodes));
  const SolveOptions opts = solver_options(cfg);
  const SolveResult sol = cfg.unconstrained
                              ? solve_unconstrained(mdl, g, opts)
                              : solve_constrained(mdl, g, cfg.t, opts);
  if (!sol.converged) {
    std::fprintf(stderr, "error: solver did not converge\n");
    return 2;
  }
  const SupportReport sup = support_radius(sol);

  double tail_slope = std::numeric_limits<double>::quiet_NaN();
  double tail_prefactor = std::numeric_limits<double>::quiet_NaN();
  int tail_points = 0;
  {
    const double lo = std::min(10.0, 0.2 * cfg.r_max);
    const double hi = std::min(30.0, 0.8 * cfg.r_max);
    try {
      const TailFit fit = fit_tail(sol.grid, sol.rho, lo, hi);
      tail_slope = fit.slope;
      tail_prefactor = std::exp(fit.intercept);
      tail_points = fit.n_points;
    } catch (const NumericalError&) {
      // compactly supported inside the window: no tail to fit
    }
  }

  Obj j;
  j.str("command", "solve-single")
      .str("family", cfg.family)
      .num("beta", mdl.beta)
      .num("b", cfg.b)
      .num("Z", Z)
      .boolean("unconstrained", cfg.unconstrained)
      .num("t", sol.t_requested)
      .num("t_achieved", sol.t_achieved)
      .num("value", sol.energy)
      .num("theta", sol.theta)
      .boolean("saturated", sol.saturated)
      .num("support_radius", sup.radius)
      .boolean("support_degenerate", sup.degenerate)
      .boolean("support_unbounded_within_domain", sup.unbounded_within_domain)
      .num("tail_slope", tail_slope)
      .num("tail_prefactor", tail_prefactor)
      .integer("tail_points", tail_points)
      .integer("iterations", sol.iterations)
      .num("rmin", cfg.r_min)
      .num("rmax", cfg.r_max)
      .integer("nodes", cfg.nodes);

  std::string csv = "r,rho\n";
  for (std::size_t i = 0; i < sol.grid.size(); ++i)
    csv += format_g17(sol.grid.r[i]) + "," + format_g17(sol.rho[i]) + "\n";

  emit(artifact_path(cfg, "solve-single", "json"), j.build() + "\n");
  emit(artifact_path(cfg, "solve-single", "csv"), csv);
  return 0;
}

int cmd_l_table(const RunConfig& cfg) {
  validate_run_config(cfg, 0, 1);
  std::vector<double> ts = default_t_values(cfg.family);
  for (double t : cfg.t_values) ts.push_back(t);
  const std::string cache = resolve_cache_dir(cfg.cache_dir);
  const LTable tab =
      load_or_build_l_table(cache, cfg.family, cfg.beta, cfg.r_min, cfg.r_max,
                            cfg.nodes, ts, solver_options(cfg), cfg.threads);
  const AuditReport audit = audit_l_table(tab);

  std::string csv =
      "t,value,theta,lprime_diff,t_achieved,support_radius,tail_density,"
      "iterations,converged,saturated\n";
  for (const auto& r : tab.rows) {
    csv += format_g17(r.t) + "," + format_g17(r.value) + "," +
           format_g17(r.theta) + "," + format_g17(r.lprime_diff) + "," +
           format_g17(r.t_achieved) + "," + format_g17(r.support_radius) +
           "," + format_g17(r.tail_density) + "," +
           std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") +
           "," + (r.saturated ? "1" : "0") + "\n";
  }

  Obj j;
  j.str("command", "l-table")
      .str("family", tab.family)
      .num("beta", tab.beta)
      .num("rmin", tab.r_min)
      .num("rmax", tab.r_max)
      .integer("nodes", tab.nodes)
      .str("model_fingerprint", tab.model_fp)
      .str("grid_fingerprint", tab.grid_fp)
      .integer("rows", static_cast<long long>(tab.rows.size()))
      .num("saturation_mass", tab.saturation_mass)
      .num("saturation_value",
           std::isfinite(tab.saturation_mass)
               ? tab.saturation_value
               : std::numeric_limits<double>::quiet_NaN())
      .boolean("audit_ok", audit.ok)
      .raw("audit_failures", jstrlist(audit.failures))
      .str("cache_path", cache.empty() ? "" : l_table_cache_path(cache, tab));

  emit(artifact_path(cfg, "l-table", "json"), j.build() + "\n");
  emit(artifact_path(cfg, "l-table", "csv"), csv);
  if (!audit.ok) {
    for (const auto& f : audit.failures)
      std::fprintf(stderr, "audit: %s\n", f.c_str());
    return 2;
  }
  return 0;
}

int cmd_gb(const RunConfig& cfg) {
  validate_run_config(cfg, 1, 1);
  if (cfg.alpha.size() != 1)
    throw ConfigError("gb needs exactly one --alpha value");
  const std::string cache = resolve_cache_dir(cfg.cache_dir);
  const GbEvaluator ev =
      make_gb_evaluator(cache, cfg.family, cfg.b, cfg.Z[0], cfg.beta,
                        cfg.r_min, cfg.r_max, cfg.nodes, {},
                        solver_options(cfg), cfg.threads);
  const double a = cfg.alpha[0];
  const double value = ev.value(a);
  const double deriv = a > 0.0 ? ev.derivative(a)
                               : -std::numeric_limits<double>::infinity();

  if (cfg.format == "csv") {
    std::string csv = "alpha,value,derivative\n";
    csv += format_g17(a) + "," + format_g17(value) + "," + format_g17(deriv) +
           "\n";
    emit(artifact_path(cfg, "gb", "csv"), csv);
  } else {
    Obj j;
    j.str("command", "gb")
        .str("family", cfg.family)
        .num("beta", cfg.beta)
        .num("b", cfg.b)
        .num("Z", cfg.Z[0])
        .num("alpha", a)
        .num("value", value)
        .num("derivative", deriv)
        .num("saturation_alpha", ev.saturation_alpha())
        .num("energy_scale", ev.energy_scale())
        .num("mass_scale", ev.mass_scale());
    emit(artifact_path(cfg, "gb", "json"), j.build() + "\n");
  }
  return 0;
}

int cmd_allocate(const RunConfig& cfg) {
  validate_run_config(cfg, 1, 64);
  NucleiConfig nc;
  nc.family = cfg.family;
  nc.b = cfg.b;
  nc.beta = cfg.beta;
  nc.Z = cfg.Z;
  nc.X = parse_positions(cfg);
  nc.m = cfg.m;
  const std::string cache = resolve_cache_dir(cfg.cache_dir);
  const auto interp =
      build_l_interp(cache, cfg.family, cfg.beta, cfg.r_min, cfg.r_max,
                     cfg.nodes, {}, solver_options(cfg), cfg.threads);
  std::vector<GbEvaluator> evs;
  for (double z : cfg.Z)
    evs.emplace_back(cfg.family, cfg.b, z, cfg.beta, interp);
  const AllocationResult res = allocate(nc, evs, cfg.tol);

  Obj kkt;
  kkt.boolean("ok", res.kkt.ok)
      .num("max_stationarity", res.kkt.max_stationarity)
      .num("feasibility_excess", res.kkt.feasibility_excess)
      .num("complementarity", res.kkt.complementarity)
      .boolean("caps_respected", res.kkt.caps_respected)
      .raw("notes", jstrlist(res.kkt.notes));
  Obj j;
  j.str("command", "allocate")
      .str("family", cfg.family)
      .num("beta", cfg.beta)
      .num("b", cfg.b)
      .raw("Z", jlist(cfg.Z))
      .num("m", cfg.m)
      .raw("alpha", jlist(res.alpha))
      .num("lambda", res.lambda)
      .num("total_mass", res.total_mass)
      .num("energy", res.energy)
      .boolean("ionized", res.ionized)
      .num("leftover", res.leftover)
      .raw("kkt", kkt.build(2));
  emit(artifact_path(cfg, "allocate", "json"), j.build() + "\n");
  if (!res.kkt.ok) {
    for (const auto& n : res.kkt.notes)
      std::fprintf(stderr, "kkt: %s\n", n.c_str());
    return 2;
  }
  return 0;
}

int cmd_threshold(const RunConfig& cfg) {
  validate_run_config(cfg, 1, 1);
  const std::string cache = resolve_cache_dir(cfg.cache_dir);
  const GbEvaluator ev =
      make_gb_evaluator(cache, cfg.family, cfg.b, cfg.Z[0], cfg.beta,
                        cfg.r_min, cfg.r_max, cfg.nodes, {},
                        solver_options(cfg), cfg.threads);
  const double thr = ionization_threshold(ev);
  Obj j;
  j.str("command", "threshold")
      .str("family", cfg.family)
      .num("beta", cfg.beta)
      .num("b", cfg.b)
      .num("Z", cfg.Z[0])
      .num("threshold", thr)  // null when infinite (no ionization)
      .boolean("infinite", !std::isfinite(thr))
      .num("normalized_saturation_mass", ev.interp().saturation_mass())
      .num("measured_normalized_saturation_mass",
           ev.interp().measured_saturation_mass());
  emit(artifact_path(cfg, "threshold", "json"), j.build() + "\n");
  return 0;
}

int cmd_gamma_check(const RunConfig& cfg) {
  validate_run_config(cfg, 1, 64);
  const std::string cache = resolve_cache_dir(cfg.cache_dir);
  const auto interp =
      build_l_interp(cache, cfg.family, cfg.beta, cfg.r_min, cfg.r_max,
                     cfg.nodes, {}, solver_options(cfg), cfg.threads);
  std::vector<GbEvaluator> evs;
  for (double z : cfg.Z)
    evs.emplace_back(cfg.family, cfg.b, z, cfg.beta, interp);

  if (cfg.Z.size() == 1) {
    const double t = cfg.t > 0.0 ? cfg.t : cfg.m;
    if (!(t > 0.0))
      throw ConfigError("gamma-check needs --t or --m > 0 for one nucleus");
    std::vector<double> ladder = cfg.eps;
    if (ladder.empty()) ladder = {1.0, 1e-1, 1e-2, 1e-3};
    const CollapseReport rep = single_nucleus_collapse(
        evs[0], t, ladder, cfg.r_min, cfg.r_max, cfg.nodes,
        solver_options(cfg));
    std::string csv = "epsilon,G_eps,mass_outside\n";
    for (const auto& row : rep.rows)
      csv += format_g17(row.eps) + "," + format_g17(row.g_eps) + "," +
             format_g17(row.mass_outside) + "\n";
    Obj j;
    j.str("command", "gamma-check")
        .str("mode", "collapse")
        .str("family", cfg.family)
        .num("beta", cfg.beta)
        .num("b", cfg.b)
        .num("Z", cfg.Z[0])
        .num("t", t)
        .num("direct_energy", rep.direct_energy)
        .num("reference", rep.reference)
        .num("max_rel_spread", rep.max_rel_spread)
        .num("reference_gap", rep.reference_gap)
        .boolean("constant_ok", rep.constant_ok)
        .boolean("reference_ok", rep.reference_ok)
        .boolean("concentration_ok", rep.concentration_ok);
    emit(artifact_path(cfg, "gamma-check", "json"), j.build() + "\n");
    emit(artifact_path(cfg, "gamma-check", "csv"), csv);
    return rep.constant_ok && rep.reference_ok ? 0 : 2;
  }

  NucleiConfig nc;
  nc.family = cfg.family;
  nc.b = cfg.b;
  nc.beta = cfg.beta;
  nc.Z = cfg.Z;
  nc.X = parse_positions(cfg);
  nc.m = cfg.m;
  if (nc.X.size() != nc.Z.size())
    throw ConfigError("gamma-check needs --x for every nucleus");

  std::vector<double> alpha = cfg.alpha;
  std::string alpha_source = "flags";
  if (alpha.empty()) {
    alpha_source = "allocate";
    alpha = allocate(nc, evs, cfg.tol).alpha;
  }
  if (alpha.size() != nc.Z.size())
    throw ConfigError("gamma-check needs one --alpha per nucleus");

  RecoverySequenceSpec spec;
  spec.config = nc;
  spec.alpha = alpha;
  spec.eps_ladder = cfg.eps;
  spec.r_min = cfg.r_min;
  spec.r_max = cfg.r_max;
  spec.nodes = cfg.nodes;
  spec.with_background = cfg.background;
  spec.background_mass = cfg.background_mass;
  spec.background_radius = cfg.background_radius;
  spec.opts = solver_options(cfg);
  const EpsilonReport rep = recovery_energy(spec, &evs);

  std::string csv = "epsilon,G_eps,cross_attraction,cross_correlation,gap\n";
  for (const auto& row : rep.rows)
    csv += format_g17(row.eps) + "," + format_g17(row.g_eps) + "," +
           format_g17(row.cross_attraction) + "," +
           format_g17(row.cross_correlation) + "," + format_g17(row.gap) +
           "\n";

  std::string carriers = "[";
  for (std::size_t i = 0; i < rep.carriers.size(); ++i) {
    Obj c;
    c.num("mass", rep.carriers[i].mass)
        .num("radius", rep.carriers[i].radius)
        .num("energy", rep.carriers[i].energy);
    carriers += (i ? ", " : "") + c.build(2);
  }
  carriers += "]";
  std::string rows = "[";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    Obj o;
    o.num("epsilon", r.eps)
        .num("G_eps", r.g_eps)
        .num("cross_attraction", r.cross_attraction)
        .num("cross_correlation", r.cross_correlation)
        .num("gap", r.gap)
        .num("gap_vs_table", r.gap_vs_table)
        .num("mass_total", r.mass_total)
        .num("corridor_attraction_lo", r.corridor_attraction_lo)
        .num("corridor_attraction_hi", r.corridor_attraction_hi)
        .boolean("within_corridor", r.within_corridor);
    rows += (i ? ", " : "") + o.build(2);
  }
  rows += "]";

  Obj j;
  j.str("command", "gamma-check")
      .str("mode", "recovery")
      .str("family", cfg.family)
      .num("beta", cfg.beta)
      .num("b", cfg.b)
      .raw("Z", jlist(cfg.Z))
      .num("m", cfg.m)
      .raw("alpha", jlist(alpha))
      .str("alpha_source", alpha_source)
      .num("reference", rep.reference)
      .num("reference_table", rep.reference_table)
      .num("fitted_slope", rep.fitted_slope)
      .boolean("slope_meaningful", rep.slope_meaningful)
      .boolean("gaps_decreasing", rep.gaps_decreasing)
      .boolean("mass_conserved", rep.mass_conserved)
      .num("background_mass", rep.background_mass)
      .raw("carriers", carriers)
      .raw("rows", rows);
  emit(artifact_path(cfg, "gamma-check", "json"), j.build() + "\n");
  emit(artifact_path(cfg, "gamma-check", "csv"), csv);
  return 0;
}

// ---------------------------------------------------------------------------
// verify: seeded property suites
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

std::vector<double> random_density(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> width(0.3, 3.0);
  std::uniform_real_distribution<double> amp(0.1, 2.0);
  const double w1 = width(rng), w2 = width(rng);
  const double a1 = amp(rng), a2 = amp(rng);
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r[i];
    rho[i] = a1 * std::exp(-(r * r) / (w1 * w1)) + a2 * std::exp(-r / w2);
  }
  return rho;
}

int cmd_verify(const RunConfig& cfg) {
  validate_run_config(cfg, 0, 64);
  std::vector<CheckResult> checks;
  std::mt19937_64 rng(cfg.seed);
  const RadialGrid g = make_log_grid(1e-6, 40.0, 1024);

  {  // Hartree identity: cumulative-charge route vs the O(n^2) double sum
    CheckResult c{"hartree-identity", true, ""};
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const std::vector<double> rho = random_density(g, rng);
      const double fast = coulomb_raw(g, rho);
      const double brute = coulomb_raw_bruteforce(g, rho);
      worst = std::max(worst, std::abs(fast - brute) / std::abs(brute));
    }
    c.ok = worst <= 1e-6;
    c.detail = "max relative difference " + format_g17(worst);
    checks.push_back(c);
  }

  {  // Scaling equivariance of T, C, U0 for all four families
    CheckResult c{"scaling-equivariance", true, ""};
    double worst = 0.0;
    const std::vector<double> rho = random_density(g, rng);
    for (const std::string& fam : {"tf_c0", "tf_d", "vw_c0", "vw_d"}) {
      const Model m = make_model(fam, 1.0, 1.0);
      const double T = kinetic_energy(m, g, rho);
      const double C = correlation_energy(m, g, rho);
      const double U = attraction_energy(g, rho);
      for (double s : {0.3, 0.5, 2.0, 3.0}) {
        const RadialDensity p = pushforward_scale(g, rho, s);
        worst = std::max(
            worst, std::abs(kinetic_energy(m, p.grid, p.values) - s * s * T) /
                       std::abs(s * s * T));
        worst = std::max(
            worst,
            std::abs(correlation_energy(m, p.grid, p.values) - s * C) /
                std::abs(s * C));
        worst = std::max(
            worst, std::abs(attraction_energy(p.grid, p.values) - s * U) /
                       std::abs(s * U));
      }
    }
    c.ok = worst <= 1e-6;
    c.detail = "max relative drift " + format_g17(worst);
    checks.push_back(c);
  }

  {  // Pointwise Euler-Lagrange inversion residuals
    CheckResult c{"inversion-residual", true, ""};
    std::uniform_real_distribution<double> rhs(0.0, 100.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double s = rhs(rng);
      const double u = std::cbrt(solve_tf_pointwise_inversion(s));
      worst = std::max(worst, std::abs((5.0 / 3.0) * u * u + u - s));
    }
    c.ok = worst <= 1e-12;
    c.detail = "max residual " + format_g17(worst);
    checks.push_back(c);
  }

  {  // Attraction-splitting and far-field bounds on random densities
    CheckResult c{"integral-bounds", true, ""};
    for (int k = 0; k < 20 && c.ok; ++k) {
      const std::vector<double> rho = random_density(g, rng);
      for (double d : {0.1, 1.0})
        if (!check_tu_bound(g, rho, d).holds) c.ok = false;
      for (double R : {1.0, 5.0})
        if (!check_far_field_bound(g, rho, R).holds) c.ok = false;
    }
    c.detail = c.ok ? "all bounds hold" : "a bound failed";
    checks.push_back(c);
  }

  {  // Domain-size stability of the unconstrained solve
    CheckResult c{"rmax-doubling", true, ""};
    const Model m = make_model("tf_d", 1.0, 1.0);
    const RadialGrid g1 = make_log_grid(1e-6, 30.0, 1024);
    const RadialGrid g2 = make_log_grid(1e-6, 60.0, 1065);
    const double e1 = solve_unconstrained(m, g1).energy;
    const double e2 = solve_unconstrained(m, g2).energy;
    const double drift = std::abs(e1 - e2) / std::abs(e1);
    c.ok = drift <= 1e-4;
    c.detail = "relative energy drift " + format_g17(drift);
    checks.push_back(c);
  }

  {  // Fresh-table audits (monotone values, convex slopes, multipliers)
    CheckResult c{"table-audit", true, ""};
    std::vector<double> ts;
    for (int i = 0; i < 16; ++i)
      ts.push_back(1e-3 * std::pow(2e3, double(i) / 15));
    const LTable tab =
        build_l_table("tf_d", 5.0 / 3.0, 1e-6, 40.0, 1024, ts,
                      SolveOptions{}, cfg.threads);
    const AuditReport audit = audit_l_table(tab);
    c.ok = audit.ok;
    c.detail = audit.ok ? "all audits pass"
                        : "failures: " + std::to_string(audit.failures.size());
    checks.push_back(c);
  }

  {  // Allocation vs the exact proportional rule + KKT certificate
    CheckResult c{"allocation-oracle", true, ""};
    const auto interp = build_l_interp("", "tf_c0", 5.0 / 3.0, 1e-6, 40.0,
                                       1024, {}, SolveOptions{}, cfg.threads);
    std::uniform_int_distribution<int> m_count(1, 4);
    std::uniform_real_distribution<double> charge(0.6, 2.2);
    double worst = 0.0;
    bool kkt_ok = true;
    for (int rep = 0; rep < 3; ++rep) {
      NucleiConfig nc;
      nc.family = "tf_c0";
      const int M = m_count(rng);
      for (int k = 0; k < M; ++k) nc.Z.push_back(charge(rng));
      double zc = 0.0;
      for (double z : nc.Z) zc += z * z * z;
      std::uniform_real_distribution<double> budget(0.2 * zc, 2.5 * zc);
      nc.m = std::min(budget(rng), 3.0 * zc);
      std::vector<GbEvaluator> evs;
      for (double z : nc.Z) evs.emplace_back("tf_c0", 1.0, z, 5.0 / 3.0, interp);
      const AllocationResult res = allocate(nc, evs, 5e-3);
      kkt_ok = kkt_ok && res.kkt.ok;
      const std::vector<double> oracle = closed_form_tfc0(nc.Z, nc.m);
      for (int k = 0; k < M; ++k)
        worst = std::max(worst, std::abs(res.alpha[std::size_t(k)] -
                                         oracle[std::size_t(k)]) /
                                    (1.0 + oracle[std::size_t(k)]));
    }
    c.ok = kkt_ok && worst <= 1e-3;
    c.detail = "max allocation error " + format_g17(worst) +
               (kkt_ok ? "" : "; a KKT certificate failed");
    checks.push_back(c);
  }

  bool all_ok = true;
  std::string rows = "[";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    all_ok = all_ok && checks[i].ok;
    std::printf("[%s] %s: %s\n", checks[i].ok ? "PASS" : "FAIL",
                checks[i].name.c_str(), checks[i].detail.c_str());
    Obj o;
    o.str("name", checks[i].name)
        .boolean("ok", checks[i].ok)
        .str("detail", checks[i].detail);
    rows += (i ? ", " : "") + o.build(2);
  }
  rows += "]";
  Obj j;
  j.str("command", "verify")
      .integer("seed", static_cast<long long>(cfg.seed))
      .boolean("ok", all_ok)
      .raw("checks", rows);
  emit(artifact_path(cfg, "verify", "json"), j.build() + "\n");
  return all_ok ? 0 : 2;
}

void add_common_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.family,
                  "model family: tf_c0, tf_d, vw_c0, vw_d");
  sub->add_option("--beta", cfg.beta, "gradient exponent in [5/4, 2]");
  sub->add_option("--b", cfg.b, "correlation strength b > 0");
  sub->add_option("--z", cfg.Z, "nuclear charge (repeatable)");
  sub->add_option("--x", cfg.x_raw, "nucleus position x,y,z (repeatable)");
  sub->add_option("--m", cfg.m, "total electron mass");
  sub->add_option("--t", cfg.t, "single-nucleus mass budget");
  sub->add_option("--rmin", cfg.r_min, "inner grid radius");
  sub->add_option("--rmax", cfg.r_max, "outer grid radius");
  sub->add_option("--nodes", cfg.nodes, "grid node count (>= 64)");
  sub->add_option("--tol", cfg.tol, "certificate/audit tolerance");
  sub->add_option("--cache-dir", cfg.cache_dir,
                  "table cache directory (default: $DFTLIM_CACHE_DIR or "
                  "./.dftlim-cache)");
  sub->add_option("--out", cfg.out, "artifact path prefix");
  sub->add_option("--format", cfg.format, "json or csv");
  sub->add_option("--seed", cfg.seed, "seed for randomized checks");
  sub->add_option("--eps", cfg.eps, "epsilon ladder entry (repeatable)");
  sub->add_option("--alpha", cfg.alpha, "per-nucleus mass (repeatable)");
  sub->add_option("--t-values", cfg.t_values,
                  "extra table abscissa (repeatable)");
  sub->add_flag("--unconstrained", cfg.unconstrained,
                "solve without the mass constraint");
  sub->add_flag("--background", cfg.background,
                "add a fixed smooth background (gamma-check)");
  sub->add_option("--background-mass", cfg.background_mass,
                  "background electron mass");
  sub->add_option("--background-radius", cfg.background_radius,
                  "background support radius (0 = auto)");
  sub->add_option("--threads", cfg.threads, "table build threads (0 = auto)");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // The config file (if any) is applied first so that explicit flags win.
  try {
    for (int i = 1; i + 1 < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config") apply_config_file(cfg, argv[i + 1]);
    }
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      const std::string prefix = "--config=";
      if (a.rfind(prefix, 0) == 0)
        apply_config_file(cfg, a.substr(prefix.size()));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  CLI::App app{
      "dftlim: semiclassical-limit solvers for single- and multi-nucleus "
      "density functional models"};
  app.require_subcommand(1);
  std::string config_path;

  CLI::App* s_solve = app.add_subcommand(
      "solve-single", "solve one nucleus at a mass budget");
  CLI::App* s_table =
      app.add_subcommand("l-table", "build or load the normalized table");
  CLI::App* s_gb =
      app.add_subcommand("gb", "evaluate the rescaled cell energy");
  CLI::App* s_alloc =
      app.add_subcommand("allocate", "distribute electron mass over nuclei");
  CLI::App* s_thr =
      app.add_subcommand("threshold", "ionization threshold of one nucleus");
  CLI::App* s_gamma = app.add_subcommand(
      "gamma-check", "collapse / recovery checks along an epsilon ladder");
  CLI::App* s_verify =
      app.add_subcommand("verify", "run the property suites");
  for (CLI::App* sub :
       {s_solve, s_table, s_gb, s_alloc, s_thr, s_gamma, s_verify}) {
    add_common_options(sub, cfg);
    sub->add_option("--config", config_path,
                    "flat key=value config file (flags override)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (s_solve->parsed()) return cmd_solve_single(cfg);
    if (s_table->parsed()) return cmd_l_table(cfg);
    if (s_gb->parsed()) return cmd_gb(cfg);
    if (s_alloc->parsed()) return cmd_allocate(cfg);
    if (s_thr->parsed()) return cmd_threshold(cfg);
    if (s_gamma->parsed()) return cmd_gamma_check(cfg);
    if (s_verify->parsed()) return cmd_verify(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
