#include "icebox/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "icebox/errors.hpp"

namespace icebox {

namespace {

constexpr int kMaxRootIterations = 200;

double truncate(double theta, double R) {
  if (std::isinf(R)) return theta;
  return std::min(std::max(theta, 0.0), R);
}

// Per-cell closed-form solution of the implicit (U, chi) relations for a given
// trial value of U_Omega. Coefficients that do not depend on the cell are hoisted.
struct CellSolver {
  const MaterialParams& m;
  const BoundaryParams& b;
  double dt;
  double a;  // nu/dt + lambda
  double g;  // gamma/dt + alpha^2 lambda nu / (dt a)

  CellSolver(const MaterialParams& m_, const BoundaryParams& b_, double dt_)
      : m(m_), b(b_), dt(dt_) {
    a = m.nu / dt + m.lambda;
    g = m.gamma / dt + m.alpha * m.alpha * m.lambda * m.nu / (dt * a);
  }

  struct Result {
    double U;
    double chi;
    double reaction;
    bool interior;
  };

  Result solve(double theta_hat, double U_old, double chi_old, double U_Omega) const {
    const double r1 = m.nu * U_old / dt + m.alpha * m.lambda +
                      m.beta * (theta_hat - m.theta_c) - b.p0 - b.K_Gamma * U_Omega;
    const double chi_free =
        (m.gamma * chi_old / dt + m.alpha * m.alpha * m.lambda -
         m.L * (1.0 - theta_hat / m.theta_c) - m.alpha * m.lambda * r1 / a) /
        g;
    Result out;
    if (chi_free >= 1.0) {
      out.chi = 1.0;
      out.interior = false;
    } else if (chi_free <= 0.0) {
      out.chi = 0.0;
      out.interior = false;
    } else {
      out.chi = chi_free;
      out.interior = true;
    }
    out.reaction = out.interior ? 0.0 : g * (chi_free - out.chi);
    out.U = (r1 - m.alpha * m.lambda * out.chi) / a;
    return out;
  }

  // dU/dU_Omega for a cell whose clamp state is fixed.
  double slope(bool interior) const {
    const double dchi = interior ? m.alpha * m.lambda * b.K_Gamma / (a * g) : 0.0;
    return (-b.K_Gamma - m.alpha * m.lambda * dchi) / a;
  }
};

}  // namespace

State State::uniform(GridPtr grid, double theta, double U, double chi, double t) {
  return State{Field(grid, theta), Field(grid, U), Field(grid, chi), t};
}

void State::validate() const {
  if (!theta.grid() || theta.grid() != U.grid() || theta.grid() != chi.grid()) {
    throw std::invalid_argument("state fields must share one grid");
  }
  if (!theta.all_finite() || !U.all_finite() || !chi.all_finite()) {
    throw std::invalid_argument("state contains non-finite values");
  }
  if (!(theta.min() > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (chi.min() < 0.0 || chi.max() > 1.0) {
    throw std::invalid_argument("phase fraction must lie in [0,1]");
  }
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
  if (picard_max < 1) throw std::invalid_argument("picard_max must be at least 1");
  if (!(truncation_R > 0.0)) throw std::invalid_argument("truncation_R must be positive");
  if (!(scalar_root_tol > 0.0)) throw std::invalid_argument("scalar_root_tol must be positive");
}

PhaseUpdate resolvent_step_phase(const Field& theta_hat, const Field& U_old, const Field& chi_old,
                                 double dt, const MaterialParams& m, const BoundaryParams& b,
                                 const SolverConfig& cfg) {
  if (theta_hat.grid() != U_old.grid() || theta_hat.grid() != chi_old.grid()) {
    throw std::invalid_argument("resolvent inputs must share one grid");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const std::size_t n = theta_hat.size();
  const double cell_volume = theta_hat.grid()->cell_volume();

  std::vector<double> frozen(n);
  for (std::size_t i = 0; i < n; ++i) {
    frozen[i] = truncate(theta_hat[i], cfg.truncation_R);
    if (std::isinf(cfg.truncation_R) && !(frozen[i] > 0.0)) {
      throw std::domain_error("frozen temperature must be positive in cell " +
                              std::to_string(i));
    }
  }

  const CellSolver cells(m, b, dt);
  const double slope_interior = cells.slope(true);
  const double slope_clamped = cells.slope(false);

  // F(Y) = integral of U(Y) - Y is piecewise linear with slope <= -1.
  auto residual = [&](double Y, double& derivative) {
    double sum = 0.0;
    double dsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = cells.solve(frozen[i], U_old[i], chi_old[i], Y);
      sum += r.U;
      dsum += r.interior ? slope_interior : slope_clamped;
    }
    derivative = dsum * cell_volume - 1.0;
    return sum * cell_volume - Y;
  };

  const double scale = m.alpha * theta_hat.grid()->volume();
  double Y = integrate(U_old);
  double dF = 0.0;
  double F = residual(Y, dF);

  // Slope <= -1 gives F(Y + F(Y)) <= 0 <= F(Y) for F(Y) >= 0 (and symmetrically).
  double lo = Y;
  double hi = Y;
  if (F > 0.0) {
    hi = Y + F;
  } else {
    lo = Y + F;
  }

  int iterations = 0;
  while (std::abs(F) > cfg.scalar_root_tol * std::max(scale, std::abs(Y))) {
    if (++iterations > kMaxRootIterations) {
      throw SolverError("U_Omega root-find did not converge; reduce dt");
    }
    if (F > 0.0) {
      lo = std::max(lo, Y);
    } else {
      hi = std::min(hi, Y);
    }
    double next = Y - F / dF;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == Y) break;
    Y = next;
    F = residual(Y, dF);
  }

  PhaseUpdate out{Field(theta_hat.grid(), 0.0), Field(theta_hat.grid(), 0.0), 0.0,
                  Field(theta_hat.grid(), 0.0), iterations};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = cells.solve(frozen[i], U_old[i], chi_old[i], Y);
    out.U[i] = r.U;
    out.chi[i] = r.chi;
    out.obstacle_reaction[i] = r.reaction;
  }
  out.U_Omega = integrate(out.U);
  return out;
}

Field heat_step(const State& old, const PhaseUpdate& phase, double dt, const MaterialParams& m,
                const BoundaryParams& b, const SolverConfig& cfg) {
  const GridPtr& grid = old.theta.grid();
  const std::size_t n = grid->cell_count();
  Field source(grid, 0.0);
  Field absorption(grid, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double U_t = (phase.U[i] - old.U[i]) / dt;
    const double chi_t = (phase.chi[i] - old.chi[i]) / dt;
    const double obstacle_work = std::max(0.0, phase.obstacle_reaction[i] * chi_t);
    source[i] = m.nu * U_t * U_t + m.gamma * chi_t * chi_t + obstacle_work;

    const double coupling = m.beta * U_t + m.L / m.theta_c * chi_t;
    const bool saturated = !std::isinf(cfg.truncation_R) && old.theta[i] > cfg.truncation_R;
    if (saturated) {
      source[i] -= coupling * cfg.truncation_R;
    } else if (coupling >= 0.0) {
      absorption[i] = coupling;
    } else {
      source[i] -= coupling * truncate(old.theta[i], cfg.truncation_R);
    }
  }
  return diffusion_solve(old.theta, source, absorption, dt, m.c, m.kappa,
                         make_robin_data(*grid, b));
}

std::pair<State, StepReport> step(const State& state, const MaterialParams& m,
                                  const BoundaryParams& b, const SolverConfig& cfg) {
  return step(state, m, b, cfg, cfg.dt);
}

std::pair<State, StepReport> step(const State& state, const MaterialParams& m,
                                  const BoundaryParams& b, const SolverConfig& cfg, double dt) {
  StepReport report;
  PhaseUpdate phase = resolvent_step_phase(state.theta, state.U, state.chi, dt, m, b, cfg);
  Field theta = heat_step(state, phase, dt, m, b, cfg);
  report.picard_iterations = 1;
  report.root_iterations = phase.root_iterations;

  if (cfg.mode == CouplingMode::picard) {
    double change = l2_distance(theta, state.theta) / l2_norm(theta);
    double previous_change = change;
    while (change > cfg.picard_tol) {
      if (report.picard_iterations >= cfg.picard_max) {
        throw PicardDiverged("Picard iteration reached " + std::to_string(cfg.picard_max) +
                             " iterations at t = " + std::to_string(state.t) +
                             (change > previous_change ? " with a growing residual"
                                                       : " without converging") +
                             " (relative change " + std::to_string(change) + ")");
      }
      phase = resolvent_step_phase(theta, state.U, state.chi, dt, m, b, cfg);
      Field next = heat_step(state, phase, dt, m, b, cfg);
      previous_change = change;
      change = l2_distance(next, theta) / l2_norm(next);
      theta = std::move(next);
      ++report.picard_iterations;
      report.root_iterations += phase.root_iterations;
    }
  }

  double rate_sq = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double dU = phase.U[i] - state.U[i];
    const double dchi = phase.chi[i] - state.chi[i];
    report.max_update_theta = std::max(report.max_update_theta, std::abs(theta[i] - state.theta[i]));
    report.max_update_U = std::max(report.max_update_U, std::abs(dU));
    report.max_update_chi = std::max(report.max_update_chi, std::abs(dchi));
    rate_sq += (dU * dU + dchi * dchi) / (dt * dt);
  }
  report.rate_norm = std::sqrt(rate_sq * state.grid().cell_volume());
  report.U_Omega_new = phase.U_Omega;

  State next{std::move(theta), std::move(phase.U), std::move(phase.chi), state.t + dt};
  return {std::move(next), report};
}

double gradient_flow_potential(const Field& U, const Field& chi, const MaterialParams& m,
                               const BoundaryParams& b) {
  const double drive = 1.0 - b.theta_Gamma / m.theta_c;
  double sum = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (chi[i] < 0.0 || chi[i] > 1.0) {
      throw std::domain_error("phase fraction outside [0,1]");
    }
    const double strain = U[i] - m.alpha * (1.0 - chi[i]);
    sum += 0.5 * m.lambda * strain * strain + (m.L * chi[i] + m.beta * m.theta_c * U[i]) * drive;
  }
  const double U_Omega = integrate(U);
  return sum * U.grid()->cell_volume() + boundary_energy(U_Omega, b);
}

}  // namespace icebox
