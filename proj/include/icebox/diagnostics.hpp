#pragma once

// Thermodynamic bookkeeping along a trajectory: energy and entropy totals,
// discrete balance residuals, entropy production and the extended energy
// Psi = E + E_Gamma - theta_Gamma S, which is nonincreasing for a constant
// exterior temperature.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "icebox/dynamics.hpp"
#include "icebox/model.hpp"

namespace icebox {

struct Totals {
  double E = 0.0;        ///< integral of rho0 e, J
  double S = 0.0;        ///< integral of rho0 s, J/K
  double E_Gamma = 0.0;  ///< wall energy, J
  double U_Omega = 0.0;  ///< total volume increment, m^3
  double X_Omega = 0.0;  ///< total ice volume, integral of (1 - chi), m^3
  double P_gauge = 0.0;  ///< p0 + K_Gamma U_Omega, J/m^3
};

struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double S = 0.0;
  double E_Gamma = 0.0;
  double Psi = 0.0;
  double U_Omega = 0.0;
  double X_Omega = 0.0;
  double P_gauge = 0.0;
  double entropy_production = 0.0;  ///< W/K, zero on the initial record
  double energy_residual = 0.0;     ///< W, zero on the initial record
  double theta_min = 0.0;
  double theta_max = 0.0;
  double rate_norm = 0.0;

  // Not part of the CSV schema.
  std::size_t theta_min_cell = 0;
  double theta_Gamma = 0.0;
  double dt = 0.0;                        ///< length of the step that produced this record
  double boundary_heat_inflow = 0.0;      ///< int h (theta_Gamma - theta) ds, W
  double boundary_entropy_inflow = 0.0;   ///< int h (theta_Gamma - theta)/theta ds, W/K
  double boundary_dissipation = 0.0;      ///< int h (theta_Gamma - theta)^2/theta ds, W
  double gradient_norm_sq = 0.0;          ///< int |grad theta|^2
  /// int (U_t^2 + chi_t^2 + |grad theta|^2) + int h (theta - theta_Gamma)^2 ds.
  double steady_measure = 0.0;
};

Totals totals(const State& state, const MaterialParams& m, const BoundaryParams& b);

/// int h (theta_Gamma - theta) ds with the Robin face temperature, W.
double boundary_heat_inflow(const State& state, const MaterialParams& m, const BoundaryParams& b);

/// int |grad theta|^2 using face differences of the diffusion stencil
/// (half-cell differences to the face temperature on the boundary).
double gradient_norm_sq(const State& state, const MaterialParams& m, const BoundaryParams& b);

/// Discrete int [kappa |grad theta|^2/theta^2 + gamma chi_t^2/theta + nu U_t^2/theta] for the
/// step prev -> next. Sum of nonnegative cell and face terms.
double entropy_production(const State& prev, const State& next, double dt,
                          const MaterialParams& m, const BoundaryParams& b);

/// [(E + E_Gamma)_next - (E + E_Gamma)_prev]/dt - boundary_flux.
double energy_balance_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& next,
                               double boundary_flux);

/// E + E_Gamma - theta_Gamma S.
double lyapunov(const DiagnosticsRecord& record);

/// Record for the initial state of a run.
DiagnosticsRecord initial_record(const State& state, const MaterialParams& m,
                                 const BoundaryParams& b);
/// Record for the state produced by one step from `prev` (whose record is `prev_record`).
DiagnosticsRecord step_record(const State& prev, const DiagnosticsRecord& prev_record,
                              const State& next, const MaterialParams& m,
                              const BoundaryParams& b);

/// Lower temperature envelope 2 theta_low / (2 + theta_low t) of the normalized problem.
double lower_envelope(double theta_low, double t);

struct EnvelopeViolation {
  double t = 0.0;
  std::size_t cell = 0;
  double theta = 0.0;
  double bound = 0.0;
  std::string what;
};

struct EnvelopeReport {
  bool ok = true;
  bool lower_envelope_checked = false;
  double min_ratio = 0.0;  ///< min over records of theta_min / lower_envelope(t)
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::optional<EnvelopeViolation> violation;
};

struct EnvelopeOptions {
  /// Lower bound theta_* of the initial temperature (and <= theta_Gamma).
  double theta_low = 1.0;
  /// Monitored upper bound on theta; only finiteness is required when unset.
  std::optional<double> theta_high;
  /// The lower envelope is only meaningful for the normalized constants.
  bool normalized = true;
  double slack = 0.05;
};

/// Positivity always; lower envelope (with slack) for the normalized constants.
EnvelopeReport envelope_check(const std::vector<DiagnosticsRecord>& trajectory,
                              const EnvelopeOptions& options);

}  // namespace icebox
