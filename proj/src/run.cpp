#include "icebox/run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "icebox/errors.hpp"

namespace icebox {

RunResult run(const State& state0, const MaterialParams& m, const BoundaryParams& b,
              const SolverConfig& cfg, const RunOptions& options,
              const std::vector<Observer>& observers) {
  state0.validate();
  cfg.validate();
  if (!(options.t_end > state0.t)) throw std::invalid_argument("t_end must exceed the start time");
  if (options.record_every < 1) throw std::invalid_argument("record_every must be at least 1");

  RunResult result;
  State state = state0;
  DiagnosticsRecord record = initial_record(state, m, b);
  result.trajectory.push_back(record);
  result.min_entropy_production = std::numeric_limits<double>::infinity();
  result.max_lyapunov_increase = -std::numeric_limits<double>::infinity();
  const double psi_scale = std::abs(record.Psi);
  double reference = 0.0;

  // Step k ends at t0 + k dt exactly; the final step is shortened to land on t_end.
  const double t0 = state0.t;
  const double span = options.t_end - t0;
  const long full_steps = static_cast<long>(std::floor(span / cfg.dt * (1.0 + 1e-12)));
  const double tail = span - static_cast<double>(full_steps) * cfg.dt;
  const long total_steps = full_steps + (tail > 1e-9 * cfg.dt ? 1 : 0);

  for (long k = 1; k <= total_steps; ++k) {
    const bool last = k == total_steps;
    const double t_next = last ? options.t_end : t0 + static_cast<double>(k) * cfg.dt;
    const double dt = t_next - state.t;
    std::pair<State, StepReport> advanced;
    DiagnosticsRecord next_record;
    try {
      advanced = step(state, m, b, cfg, dt);
      advanced.first.t = t_next;
      next_record = step_record(state, record, advanced.first, m, b);
      if (!(next_record.theta_min > 0.0)) {
        throw SolverError("temperature lost positivity in cell " +
                          std::to_string(next_record.theta_min_cell));
      }
      const double increase = next_record.Psi - record.Psi;
      if (options.enforce_lyapunov && increase > options.lyapunov_slack * psi_scale) {
        throw SolverError("Lyapunov functional increased by " + std::to_string(increase));
      }
    } catch (const std::exception& e) {
      result.failure = RunFailure{state.t, e.what()};
      break;
    }

    result.max_lyapunov_increase =
        std::max(result.max_lyapunov_increase, next_record.Psi - record.Psi);
    result.min_entropy_production =
        std::min(result.min_entropy_production, next_record.entropy_production);
    result.cumulative_dissipation +=
        dt * (b.theta_Gamma * next_record.entropy_production + next_record.boundary_dissipation);
    result.max_picard_iterations =
        std::max(result.max_picard_iterations, advanced.second.picard_iterations);
    ++result.steps;

    state = std::move(advanced.first);
    record = next_record;
    for (const auto& observer : observers) observer(state, record, advanced.second);

    const double measure = std::sqrt(record.steady_measure);
    if (k == 1) reference = measure;
    const bool steady =
        options.stop_at_steady &&
        measure <= std::max(options.steady_rel_tol * reference, options.steady_abs_tol);
    if (steady) result.reached_steady = true;
    if (last || steady || k % options.record_every == 0) result.trajectory.push_back(record);
    if (steady) break;
  }

  if (result.steps == 0) {
    result.min_entropy_production = 0.0;
    result.max_lyapunov_increase = 0.0;
  }
  if (result.failure && result.trajectory.back().t != record.t) {
    result.trajectory.push_back(record);
  }
  result.final_state = std::move(state);
  result.final_record = record;
  return result;
}

}  // namespace icebox
