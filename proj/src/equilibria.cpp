#include "icebox/equilibria.hpp"

#include <stdexcept>

namespace icebox {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::liquid: return "liquid";
    case Regime::solid: return "solid";
    case Regime::mushy: return "mushy";
  }
  return "unknown";
}

Thresholds thresholds(const DimensionlessGroups& g, double theta_c) {
  if (!(g.beta_tilde < 1.0)) {
    throw std::domain_error("equilibrium classification requires beta_tilde < 1 (got " +
                            std::to_string(g.beta_tilde) + ")");
  }
  const double scale = 1.0 - g.beta_tilde;
  return {theta_c * (1.0 - g.omega / scale), theta_c * (1.0 - (g.omega + g.d) / scale)};
}

EquilibriumReport classify(double theta_Gamma, const DimensionlessGroups& g,
                           const MaterialParams& m, const BoundaryParams& b, double volume) {
  if (!(volume > 0.0)) throw std::invalid_argument("volume must be positive");
  EquilibriumReport r;
  r.thresholds = thresholds(g, m.theta_c);

  if (theta_Gamma >= r.thresholds.theta_liquid) {
    r.regime = Regime::liquid;
    r.chi_inf = 1.0;
    r.X_Omega_inf = 0.0;
  } else if (theta_Gamma <= r.thresholds.theta_solid) {
    r.regime = Regime::solid;
    r.chi_inf = 0.0;
    r.X_Omega_inf = volume;
  } else {
    r.regime = Regime::mushy;
    const double ice =
        ((1.0 - g.beta_tilde) * (1.0 - theta_Gamma / m.theta_c) - g.omega) / g.d;
    r.X_Omega_inf = volume * ice;
  }

  r.U_Omega_inf = (volume * (m.beta * (theta_Gamma - m.theta_c) - b.p0) +
                   m.alpha * m.lambda * r.X_Omega_inf) /
                  (m.lambda + b.K_Gamma * volume);
  r.U_inf = r.U_Omega_inf / volume;
  r.P_inf = gauge_pressure(r.U_Omega_inf, b);
  return r;
}

LimitReport limit_behaviors(const MaterialParams& m, const BoundaryParams& b, double volume) {
  if (!(volume > 0.0)) throw std::invalid_argument("volume must be positive");
  LimitReport out;
  auto row = [&](double K) {
    BoundaryParams bk = b;
    bk.K_Gamma = K;
    const double wall = K * volume;
    LimitRow r;
    r.K_Gamma = K;
    r.U_inf = m.alpha * m.lambda / (m.lambda + wall);
    r.P_minus_p0 = wall * r.U_inf;
    r.d = dimensionless_groups(m, bk, volume).d;
    return r;
  };
  out.compliant = row(0.0);
  out.rigid = row(out.rigid_factor * m.lambda / volume);
  out.rigid_pressure_limit = m.alpha * m.lambda;
  out.rigid_d_limit = m.alpha * m.alpha * m.lambda / m.L;
  return out;
}

}  // namespace icebox
