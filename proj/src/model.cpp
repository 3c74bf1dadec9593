#include "dftlim/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dftlim/errors.hpp"

namespace dftlim {

namespace {

void check_beta(double beta) {
  if (!(beta >= 1.25 && beta <= 2.0)) {
    std::ostringstream msg;
    msg << "gradient exponent beta must lie in [5/4, 2], got " << beta;
    throw ConfigError(msg.str());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace

double gradient_density_exponent(double beta) {
  check_beta(beta);
  return (5.0 - 4.0 * beta) / 3.0;
}

Model make_model(const std::string& family, double b, double Z, double beta) {
  if (!(b > 0.0)) {
    throw ConfigError("correlation strength b must be positive");
  }
  if (!(Z > 0.0)) {
    throw ConfigError("nuclear charge Z must be positive");
  }
  Model m;
  m.b = b;
  m.Z = Z;
  if (family == "tf_c0") {
    m.kinetic = KineticKind::ThomasFermi;
    m.correlation = CorrelationKind::LocalPower;
    m.c_kin = 1.0;
    m.c_corr = 0.75;
  } else if (family == "tf_d") {
    m.kinetic = KineticKind::ThomasFermi;
    m.correlation = CorrelationKind::Coulomb;
    m.c_kin = 0.6;
    m.c_corr = 0.5;
  } else if (family == "vw_c0") {
    check_beta(beta);
    m.kinetic = KineticKind::GradientPower;
    m.correlation = CorrelationKind::LocalPower;
    m.c_kin = 1.0;
    m.beta = beta;
    m.c_corr = 0.75;
  } else if (family == "vw_d") {
    check_beta(beta);
    m.kinetic = KineticKind::GradientPower;
    m.correlation = CorrelationKind::Coulomb;
    m.c_kin = 1.0;
    m.beta = beta;
    m.c_corr = 0.5;
  } else {
    std::ostringstream msg;
    msg << "unknown model family '" << family
        << "' (expected tf_c0, tf_d, vw_c0 or vw_d)";
    throw ConfigError(msg.str());
  }
  return m;
}

std::string family_name(const Model& m) {
  const bool vw = m.kinetic == KineticKind::GradientPower;
  const bool coul = m.correlation == CorrelationKind::Coulomb;
  if (vw) return coul ? "vw_d" : "vw_c0";
  return coul ? "tf_d" : "tf_c0";
}

bool is_gradient_kinetic(const Model& m) {
  return m.kinetic == KineticKind::GradientPower;
}

bool is_coulomb_correlation(const Model& m) {
  return m.correlation == CorrelationKind::Coulomb;
}

Model normalized(const Model& m) {
  Model out = m;
  out.b = 1.0;
  out.Z = 1.0;
  return out;
}

ScalingMap scaling_map(const Model& m) {
  // Substituting rho(x) = lambda * sigma(x / ell) maps the (b, Z) problem onto
  // the b = Z = 1 problem when lambda and ell balance the kinetic,
  // correlation and attraction scalings; the closed forms below solve that
  // 2x2 system per family. All four satisfy
  // energy_scale = lambda * ell^2 * Z and mass_scale = 1/(lambda * ell^3).
  const double b = m.b;
  const double Z = m.Z;
  ScalingMap s;
  const bool vw = is_gradient_kinetic(m);
  const bool coul = is_coulomb_correlation(m);
  if (!vw && !coul) {
    s.density_scale = b * b * b;
    s.length_scale = Z / (b * b);
  } else if (!vw && coul) {
    s.density_scale = Z * Z * b;
    s.length_scale = 1.0 / (std::cbrt(Z) * std::cbrt(b * b));
  } else if (vw && !coul) {
    const double beta = m.beta;
    s.density_scale = std::pow(b, 3.0 * (1.0 - beta)) * std::pow(Z, 3.0 * beta);
    s.length_scale = std::pow(Z, 1.0 - beta) * std::pow(b, beta - 2.0);
  } else {
    const double beta = m.beta;
    s.density_scale = std::pow(Z, 2.0 + beta) * std::pow(b, 1.0 - beta);
    s.length_scale =
        std::pow(Z, -(1.0 + beta) / 3.0) * std::pow(b, (beta - 2.0) / 3.0);
  }
  s.energy_scale = s.density_scale * s.length_scale * s.length_scale * Z;
  s.mass_scale =
      1.0 / (s.density_scale * s.length_scale * s.length_scale * s.length_scale);
  return s;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_fingerprint(const Model& m) {
  std::ostringstream key;
  key << "dftlim-model-v1;family=" << family_name(m)
      << ";c_kin=" << fmt17(m.c_kin) << ";c_corr=" << fmt17(m.c_corr)
      << ";b=" << fmt17(m.b) << ";Z=" << fmt17(m.Z);
  if (is_gradient_kinetic(m)) key << ";beta=" << fmt17(m.beta);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(key.str())));
  return std::string(buf);
}

std::string grid_fingerprint(double r_min, double r_max, std::size_t nodes) {
  std::ostringstream key;
  key << "dftlim-grid-v1;rmin=" << fmt17(r_min) << ";rmax=" << fmt17(r_max)
      << ";nodes=" << nodes;
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(key.str())));
  return std::string(buf);
}

}  // namespace dftlim
