#include "dftlim/single_nucleus.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "dftlim/errors.hpp"

namespace dftlim {

namespace {

double weighted_mass(const RadialGrid& g, const std::vector<double>& rho) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.wv[i] * rho[i];
  return acc;
}

/// a^pa * b^pb computed in log space. The plain pow product turns into
/// inf * 0 = NaN when one factor under- or overflows (negative exponents on
/// subnormal densities at the far tail); the log form underflows cleanly to
/// zero and overflows to inf only when the product genuinely diverges.
/// Caller guarantees a > 0 and b > 0.
inline double power_product(double a, double pa, double b, double pb) {
  return std::exp(pa * std::log(a) + pb * std::log(b));
}

/// Initial guess for the pointwise-kinetic families: the bare-potential
/// profile, plus a small smooth tail so the iteration starts off the floor.
std::vector<double> initial_profile(const Model& m, const RadialGrid& g,
                                    double theta) {
  const double a_eff = (5.0 / 3.0) * m.c_kin;
  const double c_eff = (m.correlation == CorrelationKind::LocalPower)
                           ? (4.0 / 3.0) * m.b * m.c_corr
                           : 0.0;
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = std::max(m.Z / g.r[i] - theta, 0.0);
    if (c_eff > 0.0) {
      const double u = tf_pointwise_inversion(a_eff, c_eff, s);
      rho[i] = u * u * u;
    } else {
      rho[i] = std::pow(s / a_eff, 1.5);
    }
    rho[i] += 1e-8 * std::exp(-g.r[i]);
  }
  return rho;
}

/// Initial guess for the gradient-kinetic families: bounded at the origin
/// (a bare-potential cusp makes the gradient term pay an enormous energy
/// that descent then has to grind away node by node) and smooth, scaled to
/// a reference mass.
std::vector<double> descent_profile(const Model& m, const RadialGrid& g,
                                    double t_ref) {
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    rho[i] = std::exp(-m.Z * g.r[i]);
  const double s = t_ref / weighted_mass(g, rho);
  for (auto& v : rho) v *= s;
  return rho;
}

// ----------------------------------------------------------------------
// Self-consistent field iteration (Thomas-Fermi kinetic + Coulomb
// correlation) at fixed multiplier theta.
// ----------------------------------------------------------------------

struct ScfOutcome {
  std::vector<double> rho;
  int iterations = 0;
  bool converged = false;
};

ScfOutcome scf_fixed_theta(const Model& m, const RadialGrid& g, double theta,
                           std::vector<double> rho, const SolveOptions& o) {
  const double inv_kin = 3.0 / (5.0 * m.c_kin);
  const double a_kin = (5.0 / 3.0) * m.c_kin;    // rho^{2/3} gradient factor
  const double h_kin = (10.0 / 9.0) * m.c_kin;   // rho^{-1/3} curvature factor
  const double bc2 = 2.0 * m.b * m.c_corr;
  const std::size_t n = g.size();
  ScfOutcome out;

  // Minimizes the strictly convex objective
  //   E(v) = c_kin sum wv v^{5/3} + b c_corr <Kv, v> + sum wv (theta - Z/r) v
  // over v >= 0 by projected Newton steps with a matrix-free CG inner solve.
  // Its stationarity conditions are exactly the fixed-point equation of the
  // damped map, so the convergence test below keeps its meaning. The fixed-
  // point direction doubles as a guaranteed-descent fallback: componentwise,
  // sign(target - rho) = -sign(gradient) by monotonicity of x^{2/3}.
  auto energy_of = [&](const std::vector<double>& v,
                       const std::vector<double>& phiv) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      e += g.wv[i] * (m.c_kin * std::pow(v[i], 5.0 / 3.0) +
                      m.b * m.c_corr * v[i] * phiv[i] +
                      (theta - m.Z / g.r[i]) * v[i]);
    return e;
  };

  std::vector<double> target(n), q(n), dkin(n), precond(n), dir(n), trial(n);
  std::vector<double> cg_r(n), cg_z(n), cg_p(n), cg_hp(n);
  std::vector<char> free_node(n);
  std::vector<double> phi = coulomb_potential(g, rho);
  double energy = energy_of(rho, phi);

  // Hessian action restricted to the free set; directions vanish elsewhere.
  auto hess_apply = [&](const std::vector<double>& v, std::vector<double>& hv) {
    const std::vector<double> kv = coulomb_action(g, v);
    for (std::size_t i = 0; i < n; ++i)
      hv[i] = free_node[i] ? dkin[i] * v[i] + bc2 * kv[i] : 0.0;
  };
  auto wdot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += g.wv[i] * a[i] * b[i];
    return acc;
  };
  // Projected Armijo backtracking from unit step along dir; returns false if
  // no acceptable step exists above rounding level. On success rho, phi and
  // energy are advanced together (phi of the accepted trial is reused as the
  // next iteration's potential).
  auto line_search = [&]() {
    double step = 1.0;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = std::max(rho[i] + step * dir[i], 0.0);
      std::vector<double> phit = coulomb_action(g, trial);
      const double e_t = energy_of(trial, phit);
      double dec = 0.0;  // <grad, trial - rho>, the projected decrease
      for (std::size_t i = 0; i < n; ++i)
        dec += g.wv[i] * q[i] * (trial[i] - rho[i]);
      if (dec < 0.0 &&
          e_t <= energy + 1e-4 * dec + 1e-14 * (1.0 + std::abs(energy))) {
        rho.swap(trial);
        phi.swap(phit);
        energy = e_t;
        return true;
      }
    }
    return false;
  };

  for (int it = 0; it < o.max_scf; ++it) {
    out.iterations = it + 1;
    // Fixed-point residual: weighted L1 distance to the pointwise inverse of
    // the Euler-Lagrange relation at the current potential.
    double resid = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s =
          std::max(m.Z / g.r[i] - bc2 * phi[i] - theta, 0.0);
      target[i] = std::pow(s * inv_kin, 1.5);
      resid += g.wv[i] * std::abs(target[i] - rho[i]);
      total += g.wv[i] * rho[i];
    }
    if (resid <= o.scf_tol * (1.0 + total)) {
      out.converged = true;
      break;
    }
    // Gradient, active set, and diagonal curvature. Nodes leaving zero get a
    // curvature floor on the scale of their fixed-point target so the Newton
    // system stays bounded.
    double qnorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double cb = std::cbrt(rho[i]);
      q[i] = a_kin * cb * cb + bc2 * phi[i] - m.Z / g.r[i] + theta;
      free_node[i] = (rho[i] > 0.0 || q[i] < 0.0) ? 1 : 0;
      const double scale = std::max({rho[i], 1e-2 * target[i], 1e-300});
      dkin[i] = h_kin / std::cbrt(scale);
      precond[i] = dkin[i] + bc2 * g.wv[i] / g.r[i];
      if (free_node[i]) qnorm2 += g.wv[i] * q[i] * q[i];
    }
    // Inexact Newton: preconditioned CG on the free set, with a forcing
    // term that tightens as the outer residual shrinks.
    std::fill(dir.begin(), dir.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      cg_r[i] = free_node[i] ? -q[i] : 0.0;
    const double eta = std::min(0.1, std::sqrt(resid / (1.0 + total)));
    const double cg_tol2 = std::max(eta * eta * qnorm2, 1e-300);
    for (std::size_t i = 0; i < n; ++i) cg_z[i] = cg_r[i] / precond[i];
    cg_p = cg_z;
    double rz = wdot(cg_r, cg_z);
    for (int cg_it = 0; cg_it < 200 && rz > 0.0; ++cg_it) {
      hess_apply(cg_p, cg_hp);
      const double php = wdot(cg_p, cg_hp);
      if (php <= 0.0) break;
      const double alpha = rz / php;
      double rr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dir[i] += alpha * cg_p[i];
        cg_r[i] -= alpha * cg_hp[i];
        rr += g.wv[i] * cg_r[i] * cg_r[i];
      }
      if (rr <= cg_tol2) break;
      for (std::size_t i = 0; i < n; ++i) cg_z[i] = cg_r[i] / precond[i];
      const double rz_next = wdot(cg_r, cg_z);
      const double beta = rz_next / rz;
      for (std::size_t i = 0; i < n; ++i) cg_p[i] = cg_z[i] + beta * cg_p[i];
      rz = rz_next;
    }
    bool accepted = wdot(q, dir) < 0.0 && line_search();
    if (!accepted) {
      // Fixed-point fallback direction (always descent, see above).
      for (std::size_t i = 0; i < n; ++i)
        dir[i] = free_node[i] ? target[i] - rho[i] : 0.0;
      accepted = line_search();
    }
    if (!accepted) break;  // stalled at rounding level
  }
  out.rho = std::move(rho);
  return out;
}

// ----------------------------------------------------------------------
// Gradient-kinetic families: projected Newton-CG at fixed multiplier,
// inside a bracketed root search on the multiplier.
//
// The kinetic integrand f(a, b) = a^alpha |b|^beta in (density, slope) is
// jointly convex for beta in [5/4, 2]: f_aa, f_bb >= 0 and det Hess f =
// alpha * beta * (1 - alpha - beta) * f^2 / (a b)^2 >= 0 because
// alpha <= 0 and 1 - alpha - beta = (beta - 2) / 3 <= 0. Both correlation
// terms are convex as well, so E + theta * mass has a unique minimiser
// over {rho >= floor} whose mass is non-increasing in theta; that makes
// the outer root search on the multiplier sound.
// ----------------------------------------------------------------------

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
};

/// Minimises total_energy + theta * mass over { rho_i >= density_floor }
/// by projected Newton steps. The Hessian of the kinetic term is banded
/// (each node couples to its derivative-stencil neighbours); Coulomb
/// correlation adds the dense-but-fast shell kernel. Conjugate gradients
/// on the free set with Jacobi preconditioning solve the Newton system
/// inexactly, and a projected Armijo line search guards global progress.
NewtonOutcome newton_fixed_theta(const Model& m, const RadialGrid& g,
                                 double theta, std::vector<double>& rho,
                                 const SolveOptions& o, int max_iter) {
  const std::size_t n = g.size();
  const double floor_value = o.density_floor;
  const double alpha = gradient_density_exponent(m.beta);
  const bool coulomb = m.correlation == CorrelationKind::Coulomb;
  const double bc = m.b * m.c_corr;

  for (auto& v : rho) v = std::max(v, floor_value);

  auto wdot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += g.wv[i] * u[i] * v[i];
    return acc;
  };
  auto energy_of = [&](const std::vector<double>& v) {
    return total_energy(m, g, v) + theta * weighted_mass(g, v);
  };

  // Hessian model at the current iterate. The density argument is inflated
  // toward a fraction of the larger neighbour so nodes climbing out of the
  // floor see the curvature of their destination instead of the
  // rho^{alpha-2} blow-up at the floor, and the slope argument is kept away
  // from zero where |b|^{beta-2} would diverge. Both adjustments evaluate
  // the same convex integrand at a shifted point, so the model stays
  // positive semidefinite; the line search guards exactness.
  std::vector<double> faa(n), fab(n), fbb(n), cdiag(n), diagH(n), pc(n);
  auto build_model = [&](const std::vector<double>& v,
                         const std::vector<double>& d) {
    for (std::size_t k = 0; k < n; ++k) {
      double nb = (k > 0) ? v[k - 1] : 0.0;
      if (k + 1 < n) nb = std::max(nb, v[k + 1]);
      const double a = std::max({v[k], 1e-2 * nb, 64.0 * floor_value});
      const double b = std::max(std::abs(d[k]), 1e-6 * a / g.r[k]);
      const double sgn = (d[k] > 0.0) ? 1.0 : -1.0;
      const double w = m.c_kin * g.wv[k];
      faa[k] =
          w * alpha * (alpha - 1.0) * power_product(a, alpha - 2.0, b, m.beta);
      fab[k] = w * alpha * m.beta * sgn *
               power_product(a, alpha - 1.0, b, m.beta - 1.0);
      fbb[k] = w * m.beta * (m.beta - 1.0) *
               power_product(a, alpha, b, m.beta - 2.0);
      cdiag[k] = (m.correlation == CorrelationKind::LocalPower)
                     ? (4.0 / 9.0) * bc * g.wv[k] / std::cbrt(a * a)
                     : 2.0 * bc * g.wv[k] * g.wv[k] / g.r[k];
    }
    // Exact diagonal of the model Hessian for Jacobi preconditioning. The
    // derivative stencil touches its own node only in the one-sided end
    // rows; interior rows scatter their slope curvature to the neighbours.
    const double inv0 = 1.0 / (g.du * g.r[0]);
    const double invn = 1.0 / (g.du * g.r[n - 1]);
    for (std::size_t k = 0; k < n; ++k) diagH[k] = faa[k] + cdiag[k];
    diagH[0] += inv0 * (fbb[0] * inv0 - 2.0 * fab[0]);
    diagH[1] += fbb[0] * inv0 * inv0;
    diagH[n - 1] += invn * (fbb[n - 1] * invn + 2.0 * fab[n - 1]);
    diagH[n - 2] += fbb[n - 1] * invn * invn;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double inv = 1.0 / (2.0 * g.du * g.r[k]);
      diagH[k - 1] += fbb[k] * inv * inv;
      diagH[k + 1] += fbb[k] * inv * inv;
    }
    double dmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) dmax = std::max(dmax, diagH[k]);
    for (std::size_t k = 0; k < n; ++k)
      pc[k] = std::max({diagH[k], 1e-14 * dmax, 1e-300}) / g.wv[k];
  };

  // Adjoint of the radial-derivative stencil (plain coordinates).
  auto dtrans_add = [&](const std::vector<double>& z,
                        std::vector<double>& out) {
    const double inv0 = 1.0 / (g.du * g.r[0]);
    const double invn = 1.0 / (g.du * g.r[n - 1]);
    out[1] += z[0] * inv0;
    out[0] -= z[0] * inv0;
    out[n - 1] += z[n - 1] * invn;
    out[n - 2] -= z[n - 1] * invn;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double inv = 1.0 / (2.0 * g.du * g.r[k]);
      out[k + 1] += z[k] * inv;
      out[k - 1] -= z[k] * inv;
    }
  };

  std::vector<char> free_node(n, 1);
  std::vector<double> hv(n), hz(n);
  // Per-volume action of the model Hessian restricted to the free set:
  // out = (faa v + fab Dv + D^T (fab v + fbb Dv) + correlation) / wv.
  auto hess_apply = [&](const std::vector<double>& v,
                        std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) hv[i] = free_node[i] ? v[i] : 0.0;
    const std::vector<double> w = radial_derivative(g, hv);
    for (std::size_t k = 0; k < n; ++k) {
      hz[k] = fab[k] * hv[k] + fbb[k] * w[k];
      out[k] = faa[k] * hv[k] + fab[k] * w[k];
    }
    dtrans_add(hz, out);
    if (coulomb) {
      const std::vector<double> kv = coulomb_action(g, hv);
      for (std::size_t k = 0; k < n; ++k) out[k] += 2.0 * bc * g.wv[k] * kv[k];
    } else {
      for (std::size_t k = 0; k < n; ++k) out[k] += cdiag[k] * hv[k];
    }
    for (std::size_t k = 0; k < n; ++k)
      out[k] = free_node[k] ? out[k] / g.wv[k] : 0.0;
  };

  NewtonOutcome res;
  double E = energy_of(rho);
  std::vector<double> grad(n), ghat(n), pg(n), dir(n), trial(n);
  std::vector<double> cg_x(n), cg_r(n), cg_z(n), cg_p(n), cg_hp(n);

  // Projected Armijo backtracking along dir (per-volume step), restricted
  // to the free set. Accepts by swapping the trial into rho.
  auto try_direction = [&]() {
    if (!(wdot(dir, ghat) < 0.0)) return false;
    double s = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      double dec = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = free_node[i] ? std::max(rho[i] + s * dir[i], floor_value)
                                : rho[i];
        dec += grad[i] * (trial[i] - rho[i]);
      }
      if (dec < 0.0) {
        const double e_t = energy_of(trial);
        if (e_t <= E + 1e-4 * dec + 1e-14 * (1.0 + std::abs(E))) {
          rho.swap(trial);
          E = e_t;
          return true;
        }
      }
      s *= 0.5;
    }
    return false;
  };

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    grad = energy_gradient(m, g, rho);
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] += theta * g.wv[i];
      ghat[i] = grad[i] / g.wv[i];
      free_node[i] = (rho[i] > 2.0 * floor_value) || (ghat[i] < 0.0);
      pg[i] = free_node[i] ? ghat[i] : 0.0;
    }
    const double pgnorm = std::sqrt(wdot(pg, pg));
    if (pgnorm <= o.pgd_tol * (1.0 + std::abs(E))) {
      res.converged = true;
      break;
    }
    build_model(rho, radial_derivative(g, rho));

    // Inexact Newton direction by preconditioned CG on the free set.
    std::fill(cg_x.begin(), cg_x.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) cg_r[i] = -pg[i];
    const double rhs2 = wdot(cg_r, cg_r);
    const double eta = std::min(0.1, std::sqrt(pgnorm / (1.0 + std::abs(E))));
    const double tol2 = eta * eta * rhs2;
    for (std::size_t i = 0; i < n; ++i) cg_z[i] = cg_r[i] / pc[i];
    cg_p = cg_z;
    double rz = wdot(cg_r, cg_z);
    for (int cg = 0; cg < 200 && rz > 0.0; ++cg) {
      hess_apply(cg_p, cg_hp);
      const double php = wdot(cg_p, cg_hp);
      if (!(php > 0.0)) break;  // round-off curvature loss: keep iterate
      const double a = rz / php;
      for (std::size_t i = 0; i < n; ++i) {
        cg_x[i] += a * cg_p[i];
        cg_r[i] -= a * cg_hp[i];
      }
      if (wdot(cg_r, cg_r) <= tol2) break;
      for (std::size_t i = 0; i < n; ++i) cg_z[i] = cg_r[i] / pc[i];
      const double rz_new = wdot(cg_r, cg_z);
      const double beta_cg = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) cg_p[i] = cg_z[i] + beta_cg * cg_p[i];
    }
    dir = cg_x;

    bool accepted = try_direction();
    if (!accepted) {
      // The Jacobi-preconditioned projected gradient is always descent.
      for (std::size_t i = 0; i < n; ++i) dir[i] = -pg[i] / pc[i];
      accepted = try_direction();
    }
    if (!accepted) break;  // line search stalled below the tolerance
  }
  return res;
}

struct PgdOutcome {
  std::vector<double> rho;
  int iterations = 0;
  bool converged = false;
  double theta = 0.0;    // multiplier matching the mass bound (0 if interior)
  bool interior = false;  // mass bound inactive at theta = 0
};

PgdOutcome minimize_gradient_kinetic(const Model& m, const RadialGrid& g,
                                     double t_bound, std::vector<double> x,
                                     const SolveOptions& o) {
  PgdOutcome out;
  out.rho = std::move(x);
  int budget = o.max_pgd;
  auto inner = [&](double th) {
    NewtonOutcome r =
        newton_fixed_theta(m, g, th, out.rho, o, std::min(budget, 400));
    budget -= r.iterations;
    out.iterations += r.iterations;
    return r;
  };

  const NewtonOutcome base = inner(0.0);
  double mass_lo = weighted_mass(g, out.rho);
  if (!std::isfinite(t_bound) ||
      mass_lo <= t_bound + 0.5 * o.mass_tol * (1.0 + t_bound)) {
    out.converged = base.converged;
    out.interior = true;
    return out;
  }

  // Bracket the multiplier. Beyond Z / r_min even the most attractive node
  // has non-negative gradient at the floor, so the bracket must close.
  double lo = 0.0, hi = 1.0;
  double mass_hi = mass_lo;
  bool inner_ok = base.converged;
  const double hi_cap = 2.0 * m.Z / g.r_min + 1.0;
  while (true) {
    const NewtonOutcome top = inner(hi);
    inner_ok = inner_ok && top.converged;
    mass_hi = weighted_mass(g, out.rho);
    if (mass_hi < t_bound || hi > hi_cap) break;
    lo = hi;
    mass_lo = mass_hi;
    hi *= 4.0;
  }

  // Illinois-damped regula falsi on mass(theta) - t over [lo, hi].
  double theta = hi, mass_mid = mass_hi;
  std::vector<double> best = out.rho;
  double best_err = std::abs(mass_mid - t_bound);
  double best_theta = theta;
  double w_lo = 1.0, w_hi = 1.0;
  int last_side = 0, it = 0;
  while (std::abs(mass_mid - t_bound) > 0.5 * o.mass_tol * (1.0 + t_bound) &&
         hi - lo > o.multiplier_tol * (1.0 + hi) && it < o.max_bisect &&
         budget > 0) {
    ++it;
    const double f_lo = w_lo * (mass_lo - t_bound);
    const double f_hi = w_hi * (mass_hi - t_bound);
    theta = (f_lo - f_hi != 0.0) ? (lo * (-f_hi) + hi * f_lo) / (f_lo - f_hi)
                                 : 0.5 * (lo + hi);
    const double margin = 1e-3 * (hi - lo);
    if (!(theta > lo + margin) || !(theta < hi - margin))
      theta = 0.5 * (lo + hi);
    const NewtonOutcome mid = inner(theta);
    inner_ok = inner_ok && mid.converged;
    mass_mid = weighted_mass(g, out.rho);
    if (std::abs(mass_mid - t_bound) < best_err) {
      best_err = std::abs(mass_mid - t_bound);
      best = out.rho;
      best_theta = theta;
    }
    if (mass_mid >= t_bound) {
      lo = theta;
      mass_lo = mass_mid;
      w_lo = 1.0;
      w_hi = (last_side == +1) ? 0.5 * w_hi : 1.0;
      last_side = +1;
    } else {
      hi = theta;
      mass_hi = mass_mid;
      w_hi = 1.0;
      w_lo = (last_side == -1) ? 0.5 * w_lo : 1.0;
      last_side = -1;
    }
  }
  if (std::abs(mass_mid - t_bound) > best_err) {
    out.rho = std::move(best);
    theta = best_theta;
  }
  out.theta = theta;
  out.converged = inner_ok &&
                  std::abs(weighted_mass(g, out.rho) - t_bound) <=
                      1e3 * o.mass_tol * (1.0 + t_bound);
  return out;
}

SolveResult finalize(const Model& m, const RadialGrid& g,
                     std::vector<double> rho, double theta, double t_requested,
                     bool saturated, bool converged, int iterations,
                     double support_threshold) {
  SolveResult res;
  res.grid = g;
  res.theta = theta;
  res.t_requested = t_requested;
  res.saturated = saturated;
  res.converged = converged;
  res.iterations = iterations;
  res.t_achieved = weighted_mass(g, rho);
  res.energy = total_energy(m, g, rho, &res.kinetic_diag);
  res.support_radius = measured_support_radius(g, rho, support_threshold);
  res.rho = std::move(rho);
  return res;
}

}  // namespace

double tf_pointwise_inversion(double a, double c, double s) {
  if (!(a > 0.0) || c < 0.0 || s < 0.0)
    throw ConfigError("tf_pointwise_inversion: need a > 0, c >= 0, s >= 0");
  if (s == 0.0) return 0.0;
  return 2.0 * s / (c + std::sqrt(c * c + 4.0 * a * s));
}

double solve_tf_pointwise_inversion(double s) {
  const double u = tf_pointwise_inversion(5.0 / 3.0, 1.0, s);
  return u * u * u;
}

std::vector<double> tf_profile(const Model& m, const RadialGrid& g,
                               double theta) {
  const double a = (5.0 / 3.0) * m.c_kin;
  const double c = (4.0 / 3.0) * m.b * m.c_corr;
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = std::max(m.Z / g.r[i] - theta, 0.0);
    const double u = tf_pointwise_inversion(a, c, s);
    rho[i] = u * u * u;
  }
  return rho;
}

std::vector<double> energy_gradient(const Model& m, const RadialGrid& g,
                                    const std::vector<double>& rho) {
  validate_density(g, rho);
  const std::size_t n = g.size();
  std::vector<double> grad(n, 0.0);

  if (m.kinetic == KineticKind::ThomasFermi) {
    for (std::size_t i = 0; i < n; ++i)
      grad[i] += m.c_kin * (5.0 / 3.0) * std::cbrt(rho[i] * rho[i]) * g.wv[i];
  } else {
    const double alpha = gradient_density_exponent(m.beta);
    const std::vector<double> d = radial_derivative(g, rho);
    for (std::size_t k = 0; k < n; ++k) {
      if (rho[k] <= 0.0) continue;
      const double ad = std::abs(d[k]);
      if (ad == 0.0) continue;
      // direct dependence through rho_k
      grad[k] += m.c_kin * g.wv[k] * alpha *
                 power_product(rho[k], alpha - 1.0, ad, m.beta);
      // dependence through the derivative stencil at node k
      const double p = m.c_kin * g.wv[k] * m.beta *
                       power_product(rho[k], alpha, ad, m.beta - 1.0) *
                       (d[k] > 0 ? 1.0 : -1.0);
      if (k == 0) {
        const double inv = 1.0 / (g.du * g.r[0]);
        grad[1] += p * inv;
        grad[0] -= p * inv;
      } else if (k == n - 1) {
        const double inv = 1.0 / (g.du * g.r[n - 1]);
        grad[n - 1] += p * inv;
        grad[n - 2] -= p * inv;
      } else {
        const double inv = 1.0 / (2.0 * g.du * g.r[k]);
        grad[k + 1] += p * inv;
        grad[k - 1] -= p * inv;
      }
    }
  }

  if (m.correlation == CorrelationKind::LocalPower) {
    for (std::size_t i = 0; i < n; ++i)
      grad[i] += m.b * m.c_corr * (4.0 / 3.0) * std::cbrt(rho[i]) * g.wv[i];
  } else {
    const std::vector<double> phi = coulomb_potential(g, rho);
    for (std::size_t i = 0; i < n; ++i)
      grad[i] += m.b * m.c_corr * 2.0 * g.wv[i] * phi[i];
  }

  for (std::size_t i = 0; i < n; ++i) grad[i] -= m.Z * g.wa[i];
  return grad;
}

double estimate_multiplier(const Model& m, const RadialGrid& g,
                           const std::vector<double>& rho,
                           double support_threshold) {
  const std::vector<double> grad = energy_gradient(m, g, rho);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (rho[i] <= support_threshold) continue;
    num += rho[i] * grad[i];  // = wv_i rho_i (grad_i / wv_i)
    den += g.wv[i] * rho[i];
  }
  if (den <= 0.0) return 0.0;
  return std::max(-num / den, 0.0);
}

SolveResult solve_constrained(const Model& m, const RadialGrid& g, double t,
                              const SolveOptions& o) {
  if (t < 0.0) throw ConfigError("solve_constrained: t must be >= 0");
  if (t == 0.0) {
    // The zero density is the unique minimizer at zero mass budget.
    std::vector<double> rho(g.size(), 0.0);
    return finalize(m, g, std::move(rho), 0.0, 0.0, false, true, 0, 0.0);
  }

  // --- Thomas-Fermi kinetic + local-power correlation: exact inversion ---
  if (m.kinetic == KineticKind::ThomasFermi &&
      m.correlation == CorrelationKind::LocalPower) {
    std::vector<double> rho = tf_profile(m, g, 0.0);
    const double m0 = weighted_mass(g, rho);
    if (t >= m0 * (1.0 - 1e-12))
      throw NumericalError(
          "solve_constrained: requested mass exceeds the grid-truncated "
          "unconstrained mass of a local-power model; increase r_max");
    double lo = 0.0, hi = m.Z / g.r_min;
    int it = 0;
    double theta = 0.0, mass_mid = m0;
    while (hi - lo > o.multiplier_tol * (1.0 + hi) && it < o.max_bisect) {
      ++it;
      theta = 0.5 * (lo + hi);
      rho = tf_profile(m, g, theta);
      mass_mid = weighted_mass(g, rho);
      (mass_mid >= t ? lo : hi) = theta;
    }
    const bool ok = std::abs(mass_mid - t) <= o.mass_tol * (1.0 + t);
    return finalize(m, g, std::move(rho), theta, t, false, ok, it, 0.0);
  }

  // --- Thomas-Fermi kinetic + Coulomb correlation: damped SCF inside a
  // bracketed root search on the multiplier ---
  if (m.kinetic == KineticKind::ThomasFermi) {
    ScfOutcome base = scf_fixed_theta(m, g, 0.0, initial_profile(m, g, 0.0), o);
    const double m0 = weighted_mass(g, base.rho);
    if (t >= m0 || std::abs(t - m0) <= o.mass_tol * (1.0 + t))
      return finalize(m, g, std::move(base.rho), 0.0, t, true, base.converged,
                      base.iterations, 0.0);
    // Upper bracket from the unscreened profile: the Coulomb potential only
    // shrinks the self-consistent density pointwise at fixed theta, so the
    // theta with bare-profile mass t has self-consistent mass <= t. The
    // bare inverse is a cheap pointwise bisection.
    double hi = m.Z / g.r_min;
    {
      double blo = 0.0, bhi = hi;
      for (int k = 0; k < 200 && bhi - blo > 1e-13 * (1.0 + bhi); ++k) {
        const double mid = 0.5 * (blo + bhi);
        (weighted_mass(g, tf_profile(m, g, mid)) >= t ? blo : bhi) = mid;
      }
      hi = bhi;
    }
    double lo = 0.0;
    double mass_lo = m0, mass_hi = 0.0;
    std::vector<double> warm = base.rho;
    std::vector<double> best = base.rho;
    double theta = 0.0, mass_mid = m0;
    int it = 0, total_inner = base.iterations;
    bool inner_ok = base.converged;
    // Evaluate hi first (needed by the secant); grow it in the unlikely
    // event the screening bound is defeated by discretization.
    {
      ScfOutcome top = scf_fixed_theta(m, g, hi, warm, o);
      total_inner += top.iterations;
      mass_hi = weighted_mass(g, top.rho);
      while (mass_hi >= t && hi < m.Z / g.r_min) {
        hi = std::min(2.0 * (hi + 1e-6), m.Z / g.r_min);
        top = scf_fixed_theta(m, g, hi, top.rho, o);
        total_inner += top.iterations;
        mass_hi = weighted_mass(g, top.rho);
      }
      inner_ok = inner_ok && top.converged;
      warm = top.rho;
      theta = hi;
      mass_mid = mass_hi;
      best = std::move(top.rho);
    }
    // Illinois-damped regula falsi on mass(theta) - t over [lo, hi].
    double w_lo = 1.0, w_hi = 1.0;
    int last_side = 0;
    while (std::abs(mass_mid - t) > 0.5 * o.mass_tol * (1.0 + t) &&
           hi - lo > o.multiplier_tol * (1.0 + hi) && it < o.max_bisect) {
      ++it;
      const double f_lo = w_lo * (mass_lo - t), f_hi = w_hi * (mass_hi - t);
      theta = (f_lo - f_hi != 0.0) ? (lo * (-f_hi) + hi * f_lo) / (f_lo - f_hi)
                                   : 0.5 * (lo + hi);
      const double margin = 1e-3 * (hi - lo);
      if (!(theta > lo + margin) || !(theta < hi - margin))
        theta = 0.5 * (lo + hi);
      ScfOutcome mid = scf_fixed_theta(m, g, theta, warm, o);
      total_inner += mid.iterations;
      inner_ok = inner_ok && mid.converged;
      mass_mid = weighted_mass(g, mid.rho);
      const double slack = 1e-7 * (1.0 + t);
      if (mass_mid > mass_lo + slack || mass_mid < mass_hi - slack)
        throw NumericalError(
            "solve_constrained: self-consistent mass is not monotone in "
            "the multiplier");
      warm = mid.rho;
      best = std::move(mid.rho);
      if (mass_mid >= t) {
        lo = theta;
        mass_lo = mass_mid;
        w_lo = 1.0;
        w_hi = (last_side == +1) ? 0.5 * w_hi : 1.0;
        last_side = +1;
      } else {
        hi = theta;
        mass_hi = mass_mid;
        w_hi = 1.0;
        w_lo = (last_side == -1) ? 0.5 * w_lo : 1.0;
        last_side = -1;
      }
    }
    const bool ok =
        inner_ok && std::abs(mass_mid - t) <= 1e3 * o.mass_tol * (1.0 + t);
    return finalize(m, g, std::move(best), theta, t, false, ok, total_inner,
                    0.0);
  }

  // --- gradient kinetic: projected Newton under the mass bound ---
  PgdOutcome run = minimize_gradient_kinetic(m, g, t, descent_profile(m, g, t), o);
  double rho_max = 0.0;
  for (double v : run.rho) rho_max = std::max(rho_max, v);
  const double thr = std::max(10.0 * o.density_floor, 1e-13 * rho_max);
  if (run.interior) {
    if (m.correlation == CorrelationKind::LocalPower)
      throw NumericalError(
          "solve_constrained: requested mass exceeds the grid-truncated "
          "unconstrained mass of a local-power model; increase r_max");
    return finalize(m, g, std::move(run.rho), 0.0, t, true, run.converged,
                    run.iterations, thr);
  }
  return finalize(m, g, std::move(run.rho), run.theta, t, false, run.converged,
                  run.iterations, thr);
}

SolveResult solve_unconstrained(const Model& m, const RadialGrid& g,
                                const SolveOptions& o) {
  if (m.kinetic == KineticKind::ThomasFermi &&
      m.correlation == CorrelationKind::LocalPower) {
    std::vector<double> rho = tf_profile(m, g, 0.0);
    SolveResult res = finalize(m, g, std::move(rho), 0.0, 0.0, true, true, 1,
                               0.0);
    res.t_requested = res.t_achieved;
    return res;
  }
  if (m.kinetic == KineticKind::ThomasFermi) {
    ScfOutcome run = scf_fixed_theta(m, g, 0.0, initial_profile(m, g, 0.0), o);
    SolveResult res = finalize(m, g, std::move(run.rho), 0.0, 0.0, true,
                               run.converged, run.iterations, 0.0);
    res.t_requested = res.t_achieved;
    return res;
  }
  PgdOutcome run =
      minimize_gradient_kinetic(m, g, std::numeric_limits<double>::infinity(),
                                descent_profile(m, g, std::max(1.0, m.Z)), o);
  double rho_max = 0.0;
  for (double v : run.rho) rho_max = std::max(rho_max, v);
  const double thr = std::max(10.0 * o.density_floor, 1e-13 * rho_max);
  SolveResult res = finalize(m, g, std::move(run.rho), 0.0, 0.0, true,
                             run.converged, run.iterations, thr);
  res.t_requested = res.t_achieved;
  return res;
}

TailFit fit_tail(const RadialGrid& g, const std::vector<double>& rho,
                 double r_lo, double r_hi) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    throw ConfigError("fit_tail: need 0 < r_lo < r_hi");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.r[i] < r_lo || g.r[i] > r_hi || rho[i] <= 0.0) continue;
    const double x = std::log(g.r[i]);
    const double y = std::log(rho[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 4)
    throw NumericalError("fit_tail: fewer than 4 positive nodes in window");
  TailFit fit;
  fit.n_points = n;
  const double det = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double fixed_slope_prefactor(const RadialGrid& g,
                             const std::vector<double>& rho, double r_lo,
                             double r_hi, double slope) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    throw ConfigError("fixed_slope_prefactor: need 0 < r_lo < r_hi");
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.r[i] < r_lo || g.r[i] > r_hi || rho[i] <= 0.0) continue;
    acc += std::log(rho[i]) - slope * std::log(g.r[i]);
    ++n;
  }
  if (n < 1)
    throw NumericalError(
        "fixed_slope_prefactor: no positive nodes in window");
  return std::exp(acc / n);
}

double measured_support_radius(const RadialGrid& g,
                               const std::vector<double>& rho,
                               double threshold) {
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (rho[i] > threshold) r = g.r[i];
  return r;
}

SupportReport support_radius(const SolveResult& sol, double floor) {
  SupportReport rep;
  const RadialGrid& g = sol.grid;
  rep.radius = g.r_min;
  rep.degenerate = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (sol.rho[i] > floor) {
      rep.radius = g.r[i];
      rep.degenerate = false;
    }
  }
  if (!rep.degenerate && sol.rho[g.size() - 1] > floor)
    rep.unbounded_within_domain = true;
  return rep;
}

}  // namespace dftlim
