#include "dftlim/ltable.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dftlim/errors.hpp"
#include "dftlim/grid.hpp"
#include "dftlim/io.hpp"

namespace dftlim {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sorted_unique(std::vector<double> ts) {
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts) {
    if (!(t > 0.0)) throw ConfigError("table abscissae must be positive");
    if (out.empty() || t > out.back() * (1.0 + 1e-12)) out.push_back(t);
  }
  if (out.empty()) throw ConfigError("table abscissae list is empty");
  return out;
}

LTableRow row_from(const SolveResult& r, double t) {
  LTableRow row;
  row.t = t;
  row.value = r.energy;
  row.t_achieved = r.t_achieved;
  row.theta = r.theta;
  row.support_radius = r.support_radius;
  row.tail_density = r.rho.empty() ? 0.0 : r.rho.back();
  row.iterations = r.iterations;
  row.converged = r.converged;
  row.saturated = r.saturated;
  return row;
}

/// Fills the finite-difference derivative column: a three-point uneven
/// first derivative in x = ln t (the abscissae are nearly geometric, so
/// the log coordinate keeps the truncation error a tiny fraction of L'),
/// one-sided secants at the ends.
void fill_lprime_diff(std::vector<LTableRow>& rows) {
  const std::size_t n = rows.size();
  if (n < 2) return;
  auto x = [&](std::size_t k) { return std::log(rows[k].t); };
  for (std::size_t k = 0; k < n; ++k) {
    double dvdx;
    if (k == 0) {
      dvdx = (rows[1].value - rows[0].value) / (x(1) - x(0));
    } else if (k == n - 1) {
      dvdx = (rows[n - 1].value - rows[n - 2].value) / (x(n - 1) - x(n - 2));
    } else {
      const double hm = x(k) - x(k - 1);
      const double hp = x(k + 1) - x(k);
      dvdx = (hm * hm * (rows[k + 1].value - rows[k].value) +
              hp * hp * (rows[k].value - rows[k - 1].value)) /
             (hm * hp * (hm + hp));
    }
    rows[k].lprime_diff = dvdx / rows[k].t;
  }
}

std::string hex_or(const ordered_json& j, const char* key) {
  return j.contains(key) && j[key].is_string() ? j[key].get<std::string>()
                                               : std::string();
}

}  // namespace

std::vector<double> default_t_values(const std::string& family) {
  std::vector<double> ts;
  const double t_lo = 1e-4, t_hi = 4.0;
  const int n = 64;
  for (int i = 0; i < n; ++i)
    ts.push_back(t_lo * std::pow(t_hi / t_lo, double(i) / (n - 1)));
  // Round masses commonly requested directly; having them as exact
  // abscissae removes interpolation error at those points.
  for (double t : {0.5, 1.0, 2.0}) ts.push_back(t);
  const Model m = make_model(family, 1.0, 1.0);
  if (is_coulomb_correlation(m)) {
    // The normalized saturation mass of these families sits near 1; extra
    // abscissae there resolve the flattening of L and pin L'(1).
    for (double t : {0.95, 0.98, 0.999, 1.001, 1.02, 1.05}) ts.push_back(t);
  }
  return sorted_unique(std::move(ts));
}

LTable build_l_table(const std::string& family, double beta, double r_min,
                     double r_max, int nodes,
                     const std::vector<double>& t_values,
                     const SolveOptions& opts, int n_threads) {
  const Model nm = make_model(family, 1.0, 1.0, beta);
  const RadialGrid g = make_log_grid(r_min, r_max, nodes);
  const std::vector<double> ts = sorted_unique(t_values);

  LTable tab;
  tab.family = family;
  tab.beta = nm.beta;
  tab.r_min = r_min;
  tab.r_max = r_max;
  tab.nodes = nodes;
  tab.model_fp = model_fingerprint(nm);
  tab.grid_fp = grid_fingerprint(r_min, r_max, static_cast<std::size_t>(nodes));
  tab.saturation_mass = kInf;
  tab.saturation_value = 0.0;
  tab.rows.resize(ts.size());

  // Coulomb correlation saturates at a finite mass: solve the unconstrained
  // problem once and reuse it for every abscissa past saturation.
  SolveResult sat;
  bool have_sat = false;
  if (is_coulomb_correlation(nm)) {
    sat = solve_unconstrained(nm, g, opts);
    tab.saturation_mass = sat.t_achieved;
    tab.saturation_value = sat.energy;
    have_sat = true;
  }

  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (have_sat && ts[i] >= tab.saturation_mass * (1.0 - 1e-9)) {
      tab.rows[i] = row_from(sat, ts[i]);
      tab.rows[i].saturated = true;
      tab.rows[i].theta = 0.0;
    } else {
      work.push_back(i);
    }
  }

  int threads = n_threads > 0
                    ? n_threads
                    : static_cast<int>(std::min(
                          std::thread::hardware_concurrency(), 8u));
  threads = std::max(1, std::min<int>(threads, int(work.size())));

  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t w = next.fetch_add(1);
      if (w >= work.size()) break;
      {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (first_error) break;
      }
      try {
        const std::size_t i = work[w];
        try {
          tab.rows[i] = row_from(solve_constrained(nm, g, ts[i], opts), ts[i]);
        } catch (const NumericalError&) {
          // Per-row solver failure: leave a flagged gap, keep the table.
          LTableRow gap;
          gap.t = ts[i];
          gap.value = std::numeric_limits<double>::quiet_NaN();
          gap.converged = false;
          tab.rows[i] = gap;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  fill_lprime_diff(tab.rows);
  return tab;
}

AuditReport audit_l_table(const LTable& tab) {
  AuditReport rep;
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.failures.push_back(msg);
  };
  const auto& rows = tab.rows;
  if (rows.size() < 4) {
    fail("table has fewer than 4 rows");
    return rep;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    std::ostringstream tag;
    tag << "row t=" << format_g17(r.t) << ": ";
    if (!std::isfinite(r.value) || !std::isfinite(r.theta))
      fail(tag.str() + "non-finite entries");
    if (!r.converged) fail(tag.str() + "solver did not converge");
    if (r.theta < 0.0) fail(tag.str() + "negative multiplier");
    if (!r.saturated &&
        std::abs(r.t_achieved - r.t) > 1e-6 * (1.0 + r.t))
      fail(tag.str() + "achieved mass differs from request");
  }
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k + 1].value >
        rows[k].value + 1e-12 * (1.0 + std::abs(rows[k].value)))
      fail("value increases between t=" + format_g17(rows[k].t) + " and t=" +
           format_g17(rows[k + 1].t));
  }
  std::vector<double> secant(rows.size() - 1);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    secant[k] =
        (rows[k + 1].value - rows[k].value) / (rows[k + 1].t - rows[k].t);
  for (std::size_t k = 0; k + 1 < secant.size(); ++k) {
    const double slack =
        1e-6 * (1.0 + std::abs(secant[k]) + std::abs(secant[k + 1]));
    if (secant[k + 1] < secant[k] - slack)
      fail("secant slopes decrease near t=" + format_g17(rows[k + 1].t) +
           " (convexity violated)");
  }
  // Multiplier vs finite-difference derivative, away from the saturation
  // kink and the table ends. The centered difference is a convex combination
  // of one-sided secants in x = ln t, and each secant equals t L'(t) / t_k
  // at some interior abscissa; with L' = -theta nondecreasing (convexity)
  // the estimate must fall between the neighbouring multipliers scaled by
  // the stencil stretch factors. This sandwich is exact for any convex
  // table, with slack only for multiplier error — no truncation-order
  // assumption on the t spacing.
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    if (rows[k - 1].saturated || rows[k].saturated || rows[k + 1].saturated)
      continue;
    const double slack = 5e-3 * (1.0 + rows[k].theta);
    const double lo = -rows[k - 1].theta * rows[k + 1].t / rows[k].t - slack;
    const double hi = -rows[k + 1].theta * rows[k - 1].t / rows[k].t + slack;
    if (rows[k].lprime_diff < lo || rows[k].lprime_diff > hi)
      fail("derivative estimators disagree at t=" + format_g17(rows[k].t) +
           ": secant " + format_g17(rows[k].lprime_diff) +
           " outside multiplier bracket [" + format_g17(lo) + ", " +
           format_g17(hi) + "]");
  }
  return rep;
}

std::string l_table_cache_path(const std::string& cache_dir,
                               const LTable& tab) {
  return cache_dir + "/ltable_" + tab.model_fp + "_" + tab.grid_fp + ".json";
}

namespace {

ordered_json table_to_json(const LTable& tab) {
  ordered_json j;
  j["format"] = "dftlim-ltable-v1";
  j["family"] = tab.family;
  j["beta"] = tab.beta;
  j["r_min"] = tab.r_min;
  j["r_max"] = tab.r_max;
  j["nodes"] = tab.nodes;
  j["model_fingerprint"] = tab.model_fp;
  j["grid_fingerprint"] = tab.grid_fp;
  if (std::isfinite(tab.saturation_mass)) {
    j["saturation_mass"] = tab.saturation_mass;
    j["saturation_value"] = tab.saturation_value;
  } else {
    j["saturation_mass"] = nullptr;  // infinite (local-power correlation)
    j["saturation_value"] = nullptr;
  }
  ordered_json rows = ordered_json::array();
  for (const auto& r : tab.rows) {
    ordered_json row;
    row["t"] = r.t;
    if (std::isfinite(r.value))
      row["value"] = r.value;
    else
      row["value"] = nullptr;  // flagged gap (row solver did not converge)
    row["t_achieved"] = r.t_achieved;
    row["theta"] = r.theta;
    if (std::isfinite(r.lprime_diff))
      row["lprime_diff"] = r.lprime_diff;
    else
      row["lprime_diff"] = nullptr;
    row["support_radius"] = r.support_radius;
    row["tail_density"] = r.tail_density;
    row["iterations"] = r.iterations;
    row["converged"] = r.converged;
    row["saturated"] = r.saturated;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

bool table_from_json(const ordered_json& j, LTable& tab) {
  if (!j.is_object() || hex_or(j, "format") != "dftlim-ltable-v1")
    return false;
  try {
    tab.family = j.at("family").get<std::string>();
    tab.beta = j.at("beta").get<double>();
    tab.r_min = j.at("r_min").get<double>();
    tab.r_max = j.at("r_max").get<double>();
    tab.nodes = j.at("nodes").get<int>();
    tab.model_fp = j.at("model_fingerprint").get<std::string>();
    tab.grid_fp = j.at("grid_fingerprint").get<std::string>();
    if (j.at("saturation_mass").is_null()) {
      tab.saturation_mass = kInf;
      tab.saturation_value = 0.0;
    } else {
      tab.saturation_mass = j.at("saturation_mass").get<double>();
      tab.saturation_value = j.at("saturation_value").get<double>();
    }
    tab.rows.clear();
    for (const auto& rj : j.at("rows")) {
      LTableRow r;
      r.t = rj.at("t").get<double>();
      if (rj.at("value").is_null())
        r.value = std::numeric_limits<double>::quiet_NaN();
      else
        r.value = rj.at("value").get<double>();
      r.t_achieved = rj.at("t_achieved").get<double>();
      r.theta = rj.at("theta").get<double>();
      if (rj.at("lprime_diff").is_null())
        r.lprime_diff = std::numeric_limits<double>::quiet_NaN();
      else
        r.lprime_diff = rj.at("lprime_diff").get<double>();
      r.support_radius = rj.at("support_radius").get<double>();
      r.tail_density = rj.at("tail_density").get<double>();
      r.iterations = rj.at("iterations").get<int>();
      r.converged = rj.at("converged").get<bool>();
      r.saturated = rj.at("saturated").get<bool>();
      tab.rows.push_back(r);
    }
  } catch (const ordered_json::exception&) {
    return false;
  }
  return tab.rows.size() >= 2;
}

}  // namespace

LTable load_or_build_l_table(const std::string& cache_dir,
                             const std::string& family, double beta,
                             double r_min, double r_max, int nodes,
                             const std::vector<double>& t_values,
                             const SolveOptions& opts, int n_threads) {
  if (cache_dir.empty())
    return build_l_table(family, beta, r_min, r_max, nodes, t_values, opts,
                         n_threads);

  const Model nm = make_model(family, 1.0, 1.0, beta);
  LTable probe;
  probe.model_fp = model_fingerprint(nm);
  probe.grid_fp =
      grid_fingerprint(r_min, r_max, static_cast<std::size_t>(nodes));
  const std::string path = l_table_cache_path(cache_dir, probe);

  LTable cached;
  bool have_cached = false;
  if (file_exists(path)) {
    const ordered_json j =
        ordered_json::parse(read_text_file(path), nullptr, false);
    if (!j.is_discarded() && table_from_json(j, cached) &&
        cached.model_fp == probe.model_fp && cached.grid_fp == probe.grid_fp)
      have_cached = true;
  }

  const std::vector<double> ts = sorted_unique(t_values);
  std::vector<double> missing;
  if (have_cached) {
    // An unconverged cached row counts as missing so a later run retries it.
    for (double t : ts) {
      bool found = false;
      for (const auto& r : cached.rows)
        if (std::abs(r.t - t) <= 1e-12 * (1.0 + t)) {
          found = r.converged && std::isfinite(r.value);
          break;
        }
      if (!found) missing.push_back(t);
    }
    if (missing.empty()) return cached;
  } else {
    missing = ts;
  }

  LTable fresh = build_l_table(family, beta, r_min, r_max, nodes, missing,
                               opts, n_threads);
  if (have_cached) {
    for (const auto& r : cached.rows) {
      bool rebuilt = false;
      for (const auto& f : fresh.rows)
        if (std::abs(f.t - r.t) <= 1e-12 * (1.0 + r.t)) {
          rebuilt = true;
          break;
        }
      if (!rebuilt) fresh.rows.push_back(r);
    }
    std::sort(fresh.rows.begin(), fresh.rows.end(),
              [](const LTableRow& a, const LTableRow& b) { return a.t < b.t; });
    fill_lprime_diff(fresh.rows);
  }
  ensure_directory(cache_dir);
  atomic_write_text(path, table_to_json(fresh).dump(2) + "\n");
  return fresh;
}

LInterp::LInterp(LTable table) : tab_(std::move(table)) {
  if (tab_.rows.size() < 4)
    throw ConfigError("LInterp: table needs at least 4 rows");
  for (const auto& r : tab_.rows)
    if (!r.converged || !std::isfinite(r.value))
      throw ConfigError("LInterp: table has an unconverged row at t=" +
                        format_g17(r.t) + "; rebuild or drop flagged rows");
  for (std::size_t k = 0; k + 1 < tab_.rows.size(); ++k)
    if (!(tab_.rows[k].t < tab_.rows[k + 1].t))
      throw ConfigError("LInterp: table abscissae must be increasing");

  const Model nm = make_model(tab_.family, 1.0, 1.0, tab_.beta);
  coulomb_ = is_coulomb_correlation(nm);

  std::vector<double> t(tab_.rows.size()), v(tab_.rows.size()),
      d(tab_.rows.size());
  for (std::size_t k = 0; k < tab_.rows.size(); ++k) {
    t[k] = tab_.rows[k].t;
    v[k] = tab_.rows[k].value;
    d[k] = -tab_.rows[k].theta;
  }
  value_ = build_convex_interp(t, v);
  lprime_ = build_pchip(t, isotonic_nondecreasing(d));

  // Small-t power law L = -c t^p, value-matched at the first abscissa.
  if (!(v[0] < 0.0))
    throw ConfigError("LInterp: value at the smallest abscissa must be < 0");
  if (nm.kinetic == KineticKind::ThomasFermi && coulomb_) {
    p_small_ = 1.0 / 3.0;  // exact concentration exponent for this family
  } else {
    const double p = std::log(v[1] / v[0]) / std::log(t[1] / t[0]);
    p_small_ = std::clamp(p, 0.05, 0.999);
  }
  c_small_ = -v[0] / std::pow(t[0], p_small_);

  if (!coulomb_) {
    sat_mass_structural_ = kInf;
  } else if (nm.kinetic == KineticKind::ThomasFermi &&
             std::abs(tab_.saturation_mass - 1.0) <= 5e-3) {
    // The normalized neutral mass of this family is Z/b = 1 exactly; the
    // measured value differs only by discretization error.
    sat_mass_structural_ = 1.0;
  } else {
    sat_mass_structural_ = tab_.saturation_mass;
  }
}

double LInterp::value(double t) const {
  if (t < 0.0) throw ConfigError("LInterp::value: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (t < t_min()) return -c_small_ * std::pow(t, p_small_);
  if (t <= t_max()) return convex_eval(value_, t);
  if (coulomb_ && t_max() >= tab_.saturation_mass * (1.0 - 1e-6))
    return tab_.rows.back().value;  // plateau past saturation
  throw ConfigError("LInterp::value: t=" + format_g17(t) +
                    " above table range [" + format_g17(t_min()) + ", " +
                    format_g17(t_max()) + "]; extend the LTable");
}

double LInterp::derivative(double t) const {
  if (t < 0.0) throw ConfigError("LInterp::derivative: t must be >= 0");
  if (t == 0.0) return -kInf;
  if (t < t_min())
    return -c_small_ * p_small_ * std::pow(t, p_small_ - 1.0);
  if (t <= t_max()) return std::min(pchip_eval(lprime_, t), 0.0);
  if (coulomb_ && t_max() >= tab_.saturation_mass * (1.0 - 1e-6)) return 0.0;
  throw ConfigError("LInterp::derivative: t=" + format_g17(t) +
                    " above table range [" + format_g17(t_min()) + ", " +
                    format_g17(t_max()) + "]; extend the LTable");
}

double LInterp::derivative_inverse(double slope, bool clamp_to_table) const {
  if (slope >= 0.0) return sat_mass_structural_;
  const double d_lo = pchip_eval(lprime_, t_min());
  if (slope <= d_lo) {
    // Analytic branch below the table: L'(t) = -c p t^{p-1}.
    const double t =
        std::pow(c_small_ * p_small_ / (-slope), 1.0 / (1.0 - p_small_));
    return std::min(t, t_min());
  }
  const double d_hi = pchip_eval(lprime_, t_max());
  if (slope >= d_hi && d_hi < 0.0) {
    // Flatter than anything in the table.
    if (coulomb_) return std::min(t_max(), sat_mass_structural_);
    if (clamp_to_table) return t_max();
    throw ConfigError(
        "LInterp::derivative_inverse: slope above table range; extend the "
        "LTable");
  }
  double lo = t_min(), hi = t_max();
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (pchip_eval(lprime_, mid) <= slope ? lo : hi) = mid;
  }
  return std::min(lo, sat_mass_structural_);
}

}  // namespace dftlim
