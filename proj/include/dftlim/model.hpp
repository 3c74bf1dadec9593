#pragma once

#include <cstdint>
#include <string>

namespace dftlim {

enum class KineticKind { ThomasFermi, GradientPower };
enum class CorrelationKind { LocalPower, Coulomb };

/// Energy model on radial densities:
///
///   E(rho) = kinetic + b * correlation - Z * attraction
///
/// with
///   kinetic      = c_kin * int rho^{5/3} dV                 (ThomasFermi)
///                = c_kin * int rho^alpha |rho'|^beta dV     (GradientPower,
///                  alpha = (5 - 4 beta)/3, beta in [5/4, 2])
///   correlation  = c_corr * int rho^{4/3} dV                (LocalPower)
///                = c_corr * integral rho(x) rho(y)/|x-y|    (Coulomb; the
///                  conventional 1/2 lives in c_corr)
///   attraction   = int rho(x)/|x| dV.
///
/// The four shipped presets fix the coefficient conventions:
///   tf_c0 : c_kin = 1,   c_corr = 3/4
///   tf_d  : c_kin = 3/5, c_corr = 1/2
///   vw_c0 : c_kin = 1,   c_corr = 3/4   (beta a free parameter)
///   vw_d  : c_kin = 1,   c_corr = 1/2
struct Model {
  KineticKind kinetic = KineticKind::ThomasFermi;
  CorrelationKind correlation = CorrelationKind::LocalPower;
  double c_kin = 1.0;
  double beta = 5.0 / 3.0;  ///< gradient exponent (GradientPower only)
  double c_corr = 1.0;
  double b = 1.0;  ///< correlation strength
  double Z = 1.0;  ///< nuclear charge
};

/// alpha = (5 - 4 beta)/3, the density exponent paired with a gradient
/// exponent beta so the kinetic term scales like a dilation power of 2.
double gradient_density_exponent(double beta);

/// Builds one of the presets "tf_c0", "tf_d", "vw_c0", "vw_d".
/// Throws ConfigError on an unknown family or beta outside [5/4, 2].
Model make_model(const std::string& family, double b, double Z,
                 double beta = 5.0 / 3.0);

std::string family_name(const Model& m);

bool is_gradient_kinetic(const Model& m);
bool is_coulomb_correlation(const Model& m);

/// Same model with b = Z = 1 (the reference problem the L-table tabulates).
Model normalized(const Model& m);

/// How the (b, Z) problem maps onto the reference problem:
///   min of E at mass alpha = energy_scale * Lref(alpha * mass_scale),
/// and the minimizer is rho(r) = density_scale * sigma(r / length_scale)
/// where sigma is the reference minimizer at mass alpha * mass_scale.
struct ScalingMap {
  double energy_scale = 1.0;
  double mass_scale = 1.0;
  double density_scale = 1.0;
  double length_scale = 1.0;
};

ScalingMap scaling_map(const Model& m);

/// FNV-1a 64-bit over a byte string, for stable cache fingerprints.
std::uint64_t fnv1a64(const std::string& bytes);

/// Fingerprint of all model fields (family, coefficients, beta, b, Z).
std::string model_fingerprint(const Model& m);

/// Fingerprint of the grid parameters.
std::string grid_fingerprint(double r_min, double r_max, std::size_t nodes);

}  // namespace dftlim
