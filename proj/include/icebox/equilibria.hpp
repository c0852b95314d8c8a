#pragma once

// Long-time equilibria for a constant exterior temperature theta_Gamma.
//
// With theta = theta_Gamma the strain and phase relations reduce to
//   (lambda + K_Gamma |Omega|) U_Omega = |Omega| (beta (theta_Gamma - theta_c) - p0) + alpha lambda X_Omega
// where X_Omega is the ice volume, and the phase inclusion selects one of three
// regimes: all liquid, all solid, or a mushy window in which only the total ice
// content is determined.

#include <optional>
#include <string>

#include "icebox/model.hpp"

namespace icebox {

enum class Regime { liquid, solid, mushy };

std::string to_string(Regime regime);

struct Thresholds {
  double theta_liquid = 0.0;  ///< pure liquid at and above, K
  double theta_solid = 0.0;   ///< pure solid at and below, K
};

/// Throws std::domain_error if beta_tilde >= 1.
Thresholds thresholds(const DimensionlessGroups& g, double theta_c);

struct EquilibriumReport {
  Regime regime = Regime::liquid;
  /// Liquid fraction of the equilibrium; empty in the mushy regime (not unique).
  std::optional<double> chi_inf;
  double X_Omega_inf = 0.0;  ///< m^3
  double U_Omega_inf = 0.0;  ///< m^3
  /// Uniform strain for the pure phases; the mean strain U_Omega/|Omega| when mushy.
  double U_inf = 0.0;
  double P_inf = 0.0;  ///< gauge pressure p0 + K_Gamma U_Omega, J/m^3
  Thresholds thresholds;
};

/// Equilibrium for exterior temperature theta_Gamma. `g` must be the groups of (m, b, volume).
EquilibriumReport classify(double theta_Gamma, const DimensionlessGroups& g,
                           const MaterialParams& m, const BoundaryParams& b, double volume);

struct LimitRow {
  double K_Gamma = 0.0;
  double U_inf = 0.0;
  double P_minus_p0 = 0.0;
  double d = 0.0;
};

/// Solid-regime equilibrium in the compliant (K_Gamma = 0) and rigid limits, with
/// thermal expansion and the exterior pressure neglected. The rigid row uses the
/// finite surrogate K_Gamma = rigid_factor * lambda / |Omega|.
struct LimitReport {
  LimitRow compliant;
  LimitRow rigid;
  double rigid_factor = 1e12;
  /// Exact rigid limits: P - p0 -> alpha lambda, d -> alpha^2 lambda / L.
  double rigid_pressure_limit = 0.0;
  double rigid_d_limit = 0.0;
};

LimitReport limit_behaviors(const MaterialParams& m, const BoundaryParams& b, double volume);

}  // namespace icebox
