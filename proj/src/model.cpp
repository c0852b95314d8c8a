#include "icebox/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace icebox {

namespace {

void check_state(double theta, double chi) {
  if (!(theta > 0.0)) {
    throw std::domain_error("temperature must be positive, got " + std::to_string(theta));
  }
  if (!(chi >= 0.0 && chi <= 1.0)) {
    throw std::domain_error("phase fraction must lie in [0,1], got " + std::to_string(chi));
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("material parameter ") + name +
                                " must be finite and positive");
  }
}

}  // namespace

double MaterialParams::sound_speed() const { return std::sqrt(lambda / rho0); }

void MaterialParams::validate() const {
  require_positive(c, "c");
  require_positive(kappa, "kappa");
  require_positive(nu, "nu");
  require_positive(lambda, "lambda");
  require_positive(alpha, "alpha");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("material parameter beta must be finite and >= 0");
  }
  require_positive(gamma, "gamma");
  require_positive(L, "L");
  require_positive(theta_c, "theta_c");
  require_positive(rho0, "rho0");
}

void BoundaryParams::validate() const {
  if (!(K_Gamma >= 0.0) || !std::isfinite(K_Gamma)) {
    throw std::invalid_argument("K_Gamma must be finite and >= 0");
  }
  if (!(theta_Gamma > 0.0) || !std::isfinite(theta_Gamma)) {
    throw std::invalid_argument("theta_Gamma must be finite and > 0");
  }
  if (!std::isfinite(p0) || !std::isfinite(P_stand)) {
    throw std::invalid_argument("p0 and P_stand must be finite");
  }
  if (h_faces.empty()) throw std::invalid_argument("h must not be empty");
  bool any_positive = false;
  for (double h : h_faces) {
    if (!(h >= 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("h values must be finite and >= 0");
    }
    any_positive = any_positive || h > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("at least one h value must be > 0");
}

Preset normalized_preset() {
  MaterialParams m;
  m.c = 1.0;
  m.kappa = 1.0;
  m.nu = 1.0;
  m.lambda = 1.0;
  m.alpha = 1.0;
  m.beta = 1.0;
  m.gamma = 1.0;
  m.L = 2.0;
  m.theta_c = 1.0;
  m.rho0 = 1.0;
  return {"normalized", m, "unit constants, L = 2"};
}

Preset water_preset() {
  // Volumetric constants from the tabulated per-mass values.
  MaterialParams m;
  m.rho0 = 1.0e3;       // 1 / V_water, V_water = 1e-3 m^3/kg
  m.alpha = 0.09;       // (V_ice - V_water) / V_water with V_ice = 1.09e-3 m^3/kg
  m.lambda = 2.25e9;    // rho0 v0^2 with v0 = 1.5e3 m/s
  m.theta_c = 273.0;
  m.c = 4.2e6;          // rho0 c0 with c0 = 4.2e3 J/(kg K)
  m.L = 3.3e8;          // rho0 L0 with L0 = 3.3e5 J/kg
  m.beta = 4.5e5;       // (beta/lambda) lambda with beta/lambda = 2e-4 1/K
  // Not tabulated for water; order-of-magnitude choices.
  m.kappa = 0.6;
  m.nu = 2.4e-3;
  m.gamma = 1.0e8;
  return {"water", m,
          "Water/ice; kappa = 0.6 W/(m K), nu = 2.4e-3 Pa s and "
          "gamma = 1e8 J s/m^3 are assumed"};
}

std::vector<Preset> all_presets() { return {normalized_preset(), water_preset()}; }

Preset find_preset(std::string_view name) {
  for (auto& p : all_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

double free_energy_density(double theta, double U, double chi, const MaterialParams& m) {
  check_state(theta, chi);
  const double c0 = m.c / m.rho0;
  const double L0 = m.L / m.rho0;
  const double strain = U - m.alpha * (1.0 - chi);
  return c0 * theta * (1.0 - std::log(theta / m.theta_c)) +
         m.lambda / (2.0 * m.rho0) * strain * strain -
         m.beta / m.rho0 * (theta - m.theta_c) * U + L0 * chi * (1.0 - theta / m.theta_c);
}

double internal_energy_density(double theta, double U, double chi, const MaterialParams& m) {
  check_state(theta, chi);
  const double strain = U - m.alpha * (1.0 - chi);
  return m.c / m.rho0 * theta + m.lambda / (2.0 * m.rho0) * strain * strain +
         m.beta / m.rho0 * m.theta_c * U + m.L / m.rho0 * chi;
}

double entropy_density(double theta, double U, double chi, const MaterialParams& m) {
  check_state(theta, chi);
  return m.c / m.rho0 * std::log(theta / m.theta_c) + m.L / (m.rho0 * m.theta_c) * chi +
         m.beta / m.rho0 * U;
}

double pressure_deviation(double theta, double U, double U_t, double chi,
                          const MaterialParams& m) {
  if (!(theta > 0.0)) throw std::domain_error("temperature must be positive");
  return -m.nu * U_t - m.lambda * (U - m.alpha * (1.0 - chi)) + m.beta * (theta - m.theta_c);
}

double boundary_energy(double U_Omega, const BoundaryParams& b) {
  if (b.K_Gamma == 0.0) return b.p0 * U_Omega;
  const double shifted = U_Omega + b.p0 / b.K_Gamma;
  return 0.5 * b.K_Gamma * shifted * shifted;
}

double gauge_pressure(double U_Omega, const BoundaryParams& b) {
  return b.p0 + b.K_Gamma * U_Omega;
}

double corrected_latent_heat(const MaterialParams& m) {
  return m.L / m.rho0 - m.beta * m.alpha * m.theta_c / m.rho0;
}

DimensionlessGroups dimensionless_groups(const MaterialParams& m, const BoundaryParams& b,
                                         double volume) {
  if (!(volume > 0.0)) throw std::invalid_argument("volume must be positive");
  const double wall = b.K_Gamma * volume;
  const double denom = m.L * (m.lambda + wall);

  DimensionlessGroups g;
  g.d = m.alpha * m.alpha * m.lambda * wall / denom;
  g.beta_tilde = m.alpha * m.lambda * m.beta * m.theta_c / denom;
  g.omega = m.alpha * m.lambda * b.p0 / denom;
  g.L_beta = corrected_latent_heat(m);
  if (g.d > 0.0) {
    g.chi_star =
        ((1.0 - g.beta_tilde) * (1.0 - b.theta_Gamma / m.theta_c) - g.omega) / g.d;
  }
  return g;
}

double clausius_clapeyron_slope(const MaterialParams& m) {
  return -m.rho0 * corrected_latent_heat(m) / (m.alpha * m.theta_c);
}

}  // namespace icebox
