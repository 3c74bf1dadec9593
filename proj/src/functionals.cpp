#include "dftlim/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "dftlim/errors.hpp"

namespace dftlim {

namespace {

/// Node charges of the shell model: q_i = wv_i * rho_i.
std::vector<double> node_charges(const RadialGrid& g,
                                 const std::vector<double>& rho) {
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) q[i] = g.wv[i] * rho[i];
  return q;
}

/// a^pa * b^pb in log space: the plain pow product turns into inf * 0 = NaN
/// when one factor under- or overflows (negative exponents on subnormal
/// densities in the far tail); the log form underflows cleanly to zero.
/// Caller guarantees a > 0 and b > 0.
double power_product(double a, double pa, double b, double pb) {
  return std::exp(pa * std::log(a) + pb * std::log(b));
}

}  // namespace

double kinetic_energy(const Model& m, const RadialGrid& g,
                      const std::vector<double>& rho,
                      KineticDiagnostics* diag) {
  validate_density(g, rho);
  if (m.kinetic == KineticKind::ThomasFermi) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      acc += g.wv[i] * std::pow(rho[i], 5.0 / 3.0);
    return m.c_kin * acc;
  }
  // Gradient form: c_kin * integral rho^alpha |rho'|^beta dV with
  // alpha = (5 - 4 beta)/3 < 0 on the allowed beta range. Nodes where the
  // density vanishes are skipped (0^alpha * 0 := 0) and flagged if the
  // derivative is nonzero there.
  const double alpha = gradient_density_exponent(m.beta);
  const std::vector<double> dr = radial_derivative(g, rho);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = std::abs(dr[i]);
    if (rho[i] <= 0.0) {
      if (d != 0.0 && diag) {
        diag->gradient_at_zero_density = true;
        ++diag->flagged_nodes;
      }
      continue;
    }
    if (d == 0.0) continue;
    acc += g.wv[i] * power_product(rho[i], alpha, d, m.beta);
  }
  return m.c_kin * acc;
}

double correlation_energy(const Model& m, const RadialGrid& g,
                          const std::vector<double>& rho) {
  validate_density(g, rho);
  if (m.correlation == CorrelationKind::LocalPower) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      acc += g.wv[i] * std::pow(rho[i], 4.0 / 3.0);
    return m.c_corr * acc;
  }
  return m.c_corr * coulomb_raw(g, rho);
}

double coulomb_raw(const RadialGrid& g, const std::vector<double>& rho) {
  validate_density(g, rho);
  const std::vector<double> q = node_charges(g, rho);
  // sum_{ij} q_i q_j / max(r_i, r_j)
  //   = sum_j (q_j / r_j) * (P_j + P_{j-1}),  P_j = q_0 + ... + q_j.
  // The diagonal i == j contributes q_j^2 / r_j, counted once in P_j and
  // once via the self pairing split between P_j and P_{j-1}; writing the
  // double sum as sum_j (q_j/r_j)(2 P_{j-1} + q_j) = sum_j (q_j/r_j)(P_j +
  // P_{j-1}) keeps every ordered pair exactly once.
  double acc = 0.0;
  double prefix = 0.0;  // P_{j-1}
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double pj = prefix + q[j];
    acc += q[j] / g.r[j] * (pj + prefix);
    prefix = pj;
  }
  return acc;
}

double coulomb_raw_bruteforce(const RadialGrid& g,
                              const std::vector<double>& rho) {
  validate_density(g, rho);
  if (g.size() > 4096)
    throw ConfigError(
        "coulomb_raw_bruteforce: grid has more than 4096 nodes; "
        "use coulomb_raw instead");
  const std::vector<double> q = node_charges(g, rho);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      acc += q[i] * q[j] / std::max(g.r[i], g.r[j]);
  return acc;
}

double hartree_bruteforce(const RadialGrid& g, const std::vector<double>& rho) {
  return 0.5 * coulomb_raw_bruteforce(g, rho);
}

namespace {

std::vector<double> potential_sweep(const RadialGrid& g,
                                    const std::vector<double>& v) {
  const std::vector<double> q = node_charges(g, v);
  const std::size_t n = g.size();
  // Phi_j = (sum_{i<=j} q_i) / r_j + sum_{i>j} q_i / r_i.
  std::vector<double> phi(n, 0.0);
  double suffix = 0.0;  // sum_{i>j} q_i / r_i
  for (std::size_t k = n; k-- > 0;) {
    phi[k] = suffix;
    suffix += q[k] / g.r[k];
  }
  double prefix = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    prefix += q[j];
    phi[j] += prefix / g.r[j];
  }
  return phi;
}

}  // namespace

std::vector<double> coulomb_potential(const RadialGrid& g,
                                      const std::vector<double>& rho) {
  validate_density(g, rho);
  return potential_sweep(g, rho);
}

std::vector<double> coulomb_action(const RadialGrid& g,
                                   const std::vector<double>& v) {
  if (v.size() != g.size())
    throw ConfigError("coulomb_action: vector length does not match grid");
  return potential_sweep(g, v);
}

double attraction_energy(const RadialGrid& g, const std::vector<double>& rho) {
  validate_density(g, rho);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += g.wa[i] * rho[i];
  return acc;
}

double total_energy(const Model& m, const RadialGrid& g,
                    const std::vector<double>& rho,
                    KineticDiagnostics* diag) {
  return kinetic_energy(m, g, rho, diag) +
         m.b * correlation_energy(m, g, rho) -
         m.Z * attraction_energy(g, rho);
}

double lp_norm(const RadialGrid& g, const std::vector<double>& rho, double p) {
  validate_density(g, rho);
  if (!(p > 0.0)) throw ConfigError("lp_norm: p must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    acc += g.wv[i] * std::pow(rho[i], p);
  return std::pow(acc, 1.0 / p);
}

BoundReport check_tu_bound(const RadialGrid& g, const std::vector<double>& rho,
                           double delta) {
  if (!(delta > 0.0)) throw ConfigError("check_tu_bound: delta must be > 0");
  BoundReport rep;
  rep.lhs = attraction_energy(g, rho);
  const double pi = 3.14159265358979323846;
  rep.rhs = lp_norm(g, rho, 5.0 / 3.0) * std::pow(8.0 * pi, 2.0 / 5.0) *
                std::pow(delta, 1.0 / 5.0) +
            mass(g, rho) / delta;
  rep.slack = rep.rhs - rep.lhs;
  rep.holds = rep.slack >= -1e-12 * std::max(1.0, std::abs(rep.rhs));
  return rep;
}

BoundReport check_far_field_bound(const RadialGrid& g,
                                  const std::vector<double>& rho, double R) {
  if (!(R > 0.0)) throw ConfigError("check_far_field_bound: R must be > 0");
  BoundReport rep;
  double tail = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.r[i] >= R) tail += g.wa[i] * rho[i];
  rep.lhs = tail;
  const double D = 0.5 * coulomb_raw(g, rho);
  rep.rhs = std::sqrt(2.0 * D / R);
  rep.slack = rep.rhs - rep.lhs;
  rep.holds = rep.slack >= -1e-12 * std::max(1.0, std::abs(rep.rhs));
  return rep;
}

}  // namespace dftlim
