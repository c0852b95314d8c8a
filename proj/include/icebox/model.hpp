#pragma once

// Material constants and pointwise constitutive relations for a liquid that
// freezes inside an elastically bounded container. State variables are the
// absolute temperature theta, the volumetric strain U = div u and the phase
// fraction chi (0 = solid, 1 = liquid).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace icebox {

/// Volumetric material constants (SI units, everything per m^3).
struct MaterialParams {
  double c = 1.0;        ///< specific heat, J/(m^3 K)
  double kappa = 1.0;    ///< heat conductivity, W/(m K)
  double nu = 1.0;       ///< volume viscosity, Pa s
  double lambda = 1.0;   ///< bulk elasticity modulus, J/m^3
  double alpha = 1.0;    ///< phase expansion coefficient (V_solid - V_liquid) / V_liquid
  double beta = 1.0;     ///< thermal expansion stress coefficient, J/(m^3 K)
  double gamma = 1.0;    ///< phase relaxation coefficient, J s/m^3
  double L = 2.0;        ///< latent heat, J/m^3
  double theta_c = 1.0;  ///< freezing point at standard pressure, K
  double rho0 = 1.0;     ///< mass density, kg/m^3

  double sound_speed() const;
  /// Throws std::invalid_argument naming the first non-positive field.
  void validate() const;

  bool operator==(const MaterialParams&) const = default;
};

/// Container data: wall stiffness, heat transfer, exterior state.
struct BoundaryParams {
  double K_Gamma = 1.0;  ///< aggregate boundary stiffness, J/m^6
  /// Heat-transfer coefficient, W/(m^2 K). One value (uniform), one value per
  /// grid side (2*dim, ordered x-,x+,y-,y+,z-,z+), or one value per boundary face.
  std::vector<double> h_faces{1.0};
  double theta_Gamma = 1.0;    ///< exterior temperature, K
  double p0 = 0.0;             ///< exterior pressure deviation from standard, J/m^3
  double P_stand = 1.01325e5;  ///< standard pressure, J/m^3

  void validate() const;

  bool operator==(const BoundaryParams&) const = default;
};

/// Dimensionless numbers governing the equilibrium classification.
struct DimensionlessGroups {
  double d = 0.0;           ///< undercooling coefficient
  double beta_tilde = 0.0;  ///< thermal-expansion group
  double omega = 0.0;       ///< external-pressure group
  /// Mean ice fraction of the mushy equilibria; empty when d == 0.
  std::optional<double> chi_star;
  double L_beta = 0.0;      ///< corrected specific latent heat, J/kg
};

struct Preset {
  std::string name;
  MaterialParams material;
  std::string notes;
};

/// Unit constants with L = 2 used for the analysis of the evolution problem.
Preset normalized_preset();
/// Water/ice constants; kappa, nu and gamma are assumed (see notes).
Preset water_preset();
std::vector<Preset> all_presets();
/// Throws std::invalid_argument for an unknown name.
Preset find_preset(std::string_view name);

// Pointwise densities. All throw std::domain_error for theta <= 0 or chi outside [0,1].

/// Specific free energy f, J/kg.
double free_energy_density(double theta, double U, double chi, const MaterialParams& m);
/// Specific internal energy e = f + theta s, J/kg.
double internal_energy_density(double theta, double U, double chi, const MaterialParams& m);
/// Specific entropy s = -df/dtheta, J/(kg K).
double entropy_density(double theta, double U, double chi, const MaterialParams& m);

/// Constitutive pressure deviation -nu U_t - lambda (U - alpha (1 - chi)) + beta (theta - theta_c).
/// On solutions this equals the gauge pressure p0 + K_Gamma U_Omega; the absolute
/// pressure is P_stand plus this value.
double pressure_deviation(double theta, double U, double U_t, double chi, const MaterialParams& m);

/// Elastic energy stored in the container wall, (K/2)(U_Omega + p0/K)^2.
/// For K_Gamma == 0 the affine limit p0 * U_Omega is returned (the divergent
/// constant p0^2 / 2K is dropped; only differences enter balances).
double boundary_energy(double U_Omega, const BoundaryParams& b);

double gauge_pressure(double U_Omega, const BoundaryParams& b);

/// Throws std::invalid_argument unless volume > 0.
DimensionlessGroups dimensionless_groups(const MaterialParams& m, const BoundaryParams& b,
                                         double volume);

/// L_0 - beta alpha theta_c / rho0, J/kg.
double corrected_latent_heat(const MaterialParams& m);

/// Slope dP/dtheta of the solid/liquid coexistence line, J/(m^3 K).
double clausius_clapeyron_slope(const MaterialParams& m);

}  // namespace icebox
