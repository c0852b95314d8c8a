#include "icebox/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "icebox/diffusion.hpp"

namespace icebox {

Totals totals(const State& state, const MaterialParams& m, const BoundaryParams& b) {
  const Grid& grid = state.grid();
  const double volume = grid.cell_volume();
  Totals out;
  double E = 0.0;
  double S = 0.0;
  double ice = 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    E += internal_energy_density(state.theta[i], state.U[i], state.chi[i], m);
    S += entropy_density(state.theta[i], state.U[i], state.chi[i], m);
    ice += 1.0 - state.chi[i];
  }
  out.E = m.rho0 * E * volume;
  out.S = m.rho0 * S * volume;
  out.U_Omega = integrate(state.U);
  out.X_Omega = ice * volume;
  out.E_Gamma = boundary_energy(out.U_Omega, b);
  out.P_gauge = gauge_pressure(out.U_Omega, b);
  return out;
}

double boundary_heat_inflow(const State& state, const MaterialParams& m, const BoundaryParams& b) {
  const Grid& grid = state.grid();
  const auto inflow = boundary_heat_inflow(state.theta, m.kappa, make_robin_data(grid, b));
  return boundary_integrate(inflow, grid);
}

double gradient_norm_sq(const State& state, const MaterialParams& m, const BoundaryParams& b) {
  const Grid& grid = state.grid();
  const Field& theta = state.theta;
  double sum = 0.0;
  for_each_interior_face(grid, [&](std::size_t lo, std::size_t hi, int axis) {
    const double jump = theta[hi] - theta[lo];
    sum += grid.face_area(axis) * jump * jump / grid.spacing(axis);
  });
  const auto& faces = grid.boundary_faces();
  const auto face_theta = boundary_face_temperature(theta, m.kappa, make_robin_data(grid, b));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double jump = face_theta[f] - theta[faces[f].cell];
    sum += faces[f].area * jump * jump / (0.5 * grid.spacing(faces[f].axis));
  }
  return sum;
}

double entropy_production(const State& prev, const State& next, double dt,
                          const MaterialParams& m, const BoundaryParams& b) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const Grid& grid = next.grid();
  const Field& theta = next.theta;

  double conduction = 0.0;
  for_each_interior_face(grid, [&](std::size_t lo, std::size_t hi, int axis) {
    const double jump = theta[hi] - theta[lo];
    conduction += grid.face_area(axis) / grid.spacing(axis) * jump * jump / (theta[lo] * theta[hi]);
  });
  const auto& faces = grid.boundary_faces();
  const auto face_theta = boundary_face_temperature(theta, m.kappa, make_robin_data(grid, b));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double inner = theta[faces[f].cell];
    const double jump = face_theta[f] - inner;
    conduction += faces[f].area / (0.5 * grid.spacing(faces[f].axis)) * jump * jump /
                  (inner * face_theta[f]);
  }

  double viscous = 0.0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const double U_t = (next.U[i] - prev.U[i]) / dt;
    const double chi_t = (next.chi[i] - prev.chi[i]) / dt;
    viscous += (m.gamma * chi_t * chi_t + m.nu * U_t * U_t) / theta[i];
  }
  return m.kappa * conduction + viscous * grid.cell_volume();
}

double energy_balance_residual(const DiagnosticsRecord& prev, const DiagnosticsRecord& next,
                               double boundary_flux) {
  const double dt = next.t - prev.t;
  if (!(dt > 0.0)) throw std::invalid_argument("records must be in increasing time order");
  return ((next.E + next.E_Gamma) - (prev.E + prev.E_Gamma)) / dt - boundary_flux;
}

double lyapunov(const DiagnosticsRecord& record) {
  return record.E + record.E_Gamma - record.theta_Gamma * record.S;
}

namespace {

// Fields of a record that depend on one state only.
DiagnosticsRecord state_record(const State& state, const MaterialParams& m,
                               const BoundaryParams& b) {
  const Grid& grid = state.grid();
  const Totals tot = totals(state, m, b);
  DiagnosticsRecord r;
  r.t = state.t;
  r.E = tot.E;
  r.S = tot.S;
  r.E_Gamma = tot.E_Gamma;
  r.U_Omega = tot.U_Omega;
  r.X_Omega = tot.X_Omega;
  r.P_gauge = tot.P_gauge;
  r.theta_Gamma = b.theta_Gamma;
  r.Psi = lyapunov(r);

  const auto theta = state.theta.values();
  const auto lowest = std::min_element(theta.begin(), theta.end());
  r.theta_min = *lowest;
  r.theta_min_cell = static_cast<std::size_t>(lowest - theta.begin());
  r.theta_max = *std::max_element(theta.begin(), theta.end());

  const RobinData robin = make_robin_data(grid, b);
  const auto face_theta = boundary_face_temperature(state.theta, m.kappa, robin);
  const auto& faces = grid.boundary_faces();
  std::vector<double> heat(faces.size()), entropy(faces.size()), dissipation(faces.size()),
      mismatch(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const double gap = b.theta_Gamma - face_theta[f];
    heat[f] = robin.h[f] * gap;
    entropy[f] = heat[f] / face_theta[f];
    dissipation[f] = heat[f] * gap / face_theta[f];
    mismatch[f] = robin.h[f] * gap * gap;
  }
  r.boundary_heat_inflow = boundary_integrate(heat, grid);
  r.boundary_entropy_inflow = boundary_integrate(entropy, grid);
  r.boundary_dissipation = boundary_integrate(dissipation, grid);
  r.gradient_norm_sq = gradient_norm_sq(state, m, b);
  r.steady_measure = r.gradient_norm_sq + boundary_integrate(mismatch, grid);
  return r;
}

}  // namespace

DiagnosticsRecord initial_record(const State& state, const MaterialParams& m,
                                 const BoundaryParams& b) {
  return state_record(state, m, b);
}

DiagnosticsRecord step_record(const State& prev, const DiagnosticsRecord& prev_record,
                              const State& next, const MaterialParams& m,
                              const BoundaryParams& b) {
  DiagnosticsRecord r = state_record(next, m, b);
  r.dt = next.t - prev.t;
  r.entropy_production = entropy_production(prev, next, r.dt, m, b);
  r.energy_residual = energy_balance_residual(prev_record, r, r.boundary_heat_inflow);
  double rate_sq = 0.0;
  for (std::size_t i = 0; i < next.theta.size(); ++i) {
    const double U_t = (next.U[i] - prev.U[i]) / r.dt;
    const double chi_t = (next.chi[i] - prev.chi[i]) / r.dt;
    rate_sq += U_t * U_t + chi_t * chi_t;
  }
  rate_sq *= next.grid().cell_volume();
  r.rate_norm = std::sqrt(rate_sq);
  r.steady_measure += rate_sq;
  return r;
}

double lower_envelope(double theta_low, double t) {
  return 2.0 * theta_low / (2.0 + theta_low * t);
}

EnvelopeReport envelope_check(const std::vector<DiagnosticsRecord>& trajectory,
                              const EnvelopeOptions& options) {
  EnvelopeReport report;
  report.lower_envelope_checked = options.normalized;
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.theta_min = std::numeric_limits<double>::infinity();
  report.theta_max = -std::numeric_limits<double>::infinity();
  auto fail = [&](const DiagnosticsRecord& r, double theta, double bound, const char* what) {
    if (report.violation) return;
    report.ok = false;
    report.violation = EnvelopeViolation{r.t, r.theta_min_cell, theta, bound, what};
  };

  for (const auto& r : trajectory) {
    report.theta_min = std::min(report.theta_min, r.theta_min);
    report.theta_max = std::max(report.theta_max, r.theta_max);
    if (!(r.theta_min > 0.0)) fail(r, r.theta_min, 0.0, "temperature not positive");
    if (!std::isfinite(r.theta_max)) fail(r, r.theta_max, 0.0, "temperature not finite");
    if (options.theta_high && r.theta_max > *options.theta_high) {
      fail(r, r.theta_max, *options.theta_high, "temperature above the monitored bound");
    }
    if (options.normalized) {
      const double bound = lower_envelope(options.theta_low, r.t);
      report.min_ratio = std::min(report.min_ratio, r.theta_min / bound);
      if (r.theta_min < (1.0 - options.slack) * bound) {
        fail(r, r.theta_min, bound, "temperature below the lower envelope");
      }
    }
  }
  return report;
}

}  // namespace icebox
