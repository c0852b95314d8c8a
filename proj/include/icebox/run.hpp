#pragma once

// Time loop: repeated steps with diagnostics, optional steady-state stop.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icebox/diagnostics.hpp"
#include "icebox/dynamics.hpp"

namespace icebox {

struct RunOptions {
  double t_end = 1.0;
  /// Keep every n-th record in RunResult::trajectory (the first and last are always kept).
  int record_every = 1;
  /// Stop once sqrt(steady_measure) <= max(steady_rel_tol * initial, steady_abs_tol),
  /// where initial is sqrt(steady_measure) after the first step.
  bool stop_at_steady = false;
  double steady_rel_tol = 1e-6;
  double steady_abs_tol = 0.0;
  /// Abort when Psi grows by more than lyapunov_slack * |Psi_0| in one step.
  bool enforce_lyapunov = false;
  double lyapunov_slack = 1e-8;
};

struct RunFailure {
  double t = 0.0;  ///< time of the state the failing step started from
  std::string message;
};

struct RunResult {
  std::vector<DiagnosticsRecord> trajectory;
  State final_state;
  DiagnosticsRecord final_record;
  long steps = 0;
  bool reached_steady = false;
  int max_picard_iterations = 0;
  /// Sum over steps of dt * (theta_Gamma * entropy_production + boundary_dissipation).
  double cumulative_dissipation = 0.0;
  /// Largest one-step increase of Psi (negative when Psi decreased every step).
  double max_lyapunov_increase = 0.0;
  double min_entropy_production = 0.0;
  std::optional<RunFailure> failure;
};

/// Called once per step with the new state, its record and the step report.
using Observer = std::function<void(const State&, const DiagnosticsRecord&, const StepReport&)>;

/// Advances state0 to options.t_end in steps of cfg.dt (the last step is shortened to land
/// on t_end). Step errors stop the loop and are returned in RunResult::failure.
RunResult run(const State& state0, const MaterialParams& m, const BoundaryParams& b,
              const SolverConfig& cfg, const RunOptions& options,
              const std::vector<Observer>& observers = {});

}  // namespace icebox
