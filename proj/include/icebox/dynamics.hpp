#pragma once

// Time stepping of the reduced temperature/strain/phase system
//
//   c theta_t - kappa Lap theta = nu U_t^2 - beta theta U_t - (alpha lambda (U - alpha (1-chi)) + L) chi_t
//   nu U_t + lambda U           = alpha lambda (1-chi) + beta (theta - theta_c) - p0 - K_Gamma U_Omega
//   -gamma chi_t               in alpha lambda (U - alpha (1-chi)) + L (1 - theta/theta_c) + dI(chi)
//
// with U_Omega = integral of U and Robin heat exchange on the boundary. One step
// solves the (U, chi) relations implicitly for a frozen temperature (a resolvent
// of a convex gradient flow, the indicator I of [0,1] realised by projection)
// and then takes an implicit heat step.

#include <limits>
#include <utility>

#include "icebox/diffusion.hpp"
#include "icebox/grid.hpp"
#include "icebox/model.hpp"

namespace icebox {

struct State {
  Field theta;  ///< K
  Field U;      ///< volumetric strain
  Field chi;    ///< liquid fraction in [0,1]
  double t = 0.0;

  /// Spatially constant state on `grid`.
  static State uniform(GridPtr grid, double theta, double U, double chi, double t = 0.0);
  /// Throws std::invalid_argument on a non-positive temperature, chi outside
  /// [0,1], non-finite values or mismatched grids.
  void validate() const;
  const Grid& grid() const { return *theta.grid(); }
};

enum class CouplingMode { staggered, picard };

struct SolverConfig {
  double dt = 1e-3;
  double picard_tol = 1e-8;
  int picard_max = 50;
  /// Cutoff R of Q_R(z) = min(max(z, 0), R); infinity disables truncation.
  double truncation_R = std::numeric_limits<double>::infinity();
  double scalar_root_tol = 1e-12;
  CouplingMode mode = CouplingMode::staggered;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct StepReport {
  int picard_iterations = 0;
  int root_iterations = 0;
  double max_update_theta = 0.0;
  double max_update_U = 0.0;
  double max_update_chi = 0.0;
  double U_Omega_new = 0.0;
  /// L2 norm of (U_t, chi_t).
  double rate_norm = 0.0;
};

/// Result of the implicit (U, chi) update.
struct PhaseUpdate {
  Field U;
  Field chi;
  double U_Omega = 0.0;
  /// Selection xi of dI(chi_new) realised by the projection (zero where chi is interior).
  Field obstacle_reaction;
  int root_iterations = 0;
};

/// Backward-Euler step of the (U, chi) equations with the temperature frozen at
/// theta_hat. The nonlocal term K_Gamma U_Omega is resolved by a safeguarded
/// Newton iteration on the scalar U_Omega; each cell is solved in closed form
/// for a trial U_Omega. Throws SolverError if the scalar iteration fails and
/// std::domain_error if theta_hat <= 0 while truncation is disabled.
PhaseUpdate resolvent_step_phase(const Field& theta_hat, const Field& U_old, const Field& chi_old,
                                 double dt, const MaterialParams& m, const BoundaryParams& b,
                                 const SolverConfig& cfg = {});

/// Implicit heat step driven by the rates of `phase`. Dissipative terms
/// (nu U_t^2, gamma chi_t^2 and the obstacle work xi chi_t) are explicit; the
/// temperature-proportional coupling -(beta U_t + L chi_t/theta_c) theta is implicit
/// where it is a sink and explicit (old temperature) where it is a source, so the
/// discrete operator stays an M-matrix and temperatures stay positive.
Field heat_step(const State& old, const PhaseUpdate& phase, double dt, const MaterialParams& m,
                const BoundaryParams& b, const SolverConfig& cfg);

/// One time step of length cfg.dt in staggered or Picard mode.
/// Picard mode throws PicardDiverged when picard_max is reached.
std::pair<State, StepReport> step(const State& state, const MaterialParams& m,
                                  const BoundaryParams& b, const SolverConfig& cfg);

/// Step with an explicit step length (used for the final partial step of a run).
std::pair<State, StepReport> step(const State& state, const MaterialParams& m,
                                  const BoundaryParams& b, const SolverConfig& cfg, double dt);

/// Convex potential whose subgradient drives (U, chi) at temperature theta_Gamma:
///   int [ lambda/2 (U - alpha(1-chi))^2 + (L chi + beta theta_c U)(1 - theta_Gamma/theta_c) ]
///   + E_Gamma(U_Omega).
/// chi must lie in [0,1] (the indicator term is zero there).
double gradient_flow_potential(const Field& U, const Field& chi, const MaterialParams& m,
                               const BoundaryParams& b);

}  // namespace icebox
