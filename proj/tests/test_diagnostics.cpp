#include <doctest.h>

#include <cmath>
#include <random>

#include "icebox/diagnostics.hpp"
#include "icebox/run.hpp"
#include "oracles.hpp"

using namespace icebox;

namespace {

State random_state(const GridPtr& grid, std::mt19937_64& rng, const MaterialParams& m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = grid->cell_count();
  std::vector<double> theta(n), U(n), chi(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = m.theta_c * (0.5 + u(rng));
    U[i] = m.alpha * (u(rng) - 0.3);
    chi[i] = u(rng);
  }
  return State{Field(grid, theta), Field(grid, U), Field(grid, chi), 0.0};
}

// Uniform values that are not an equilibrium: cold boundary, liquid at theta_c.
RunResult freezing_run(int cells, double dt, double t_end, double theta_Gamma = 0.5) {
  auto grid = make_grid(Grid::line(cells, 1.0));
  const auto m = normalized_preset().material;
  BoundaryParams b;
  b.theta_Gamma = theta_Gamma;
  SolverConfig cfg;
  cfg.dt = dt;
  RunOptions options;
  options.t_end = t_end;
  return run(State::uniform(grid, 1.0, 0.0, 1.0), m, b, cfg, options);
}

double rms_of(const std::vector<DiagnosticsRecord>& trajectory, double (*f)(const DiagnosticsRecord&,
                                                                          const DiagnosticsRecord&)) {
  double sum = 0.0;
  double time = 0.0;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    const double v = f(trajectory[k - 1], trajectory[k]);
    sum += trajectory[k].dt * v * v;
    time += trajectory[k].dt;
  }
  return std::sqrt(sum / time);
}

}  // namespace

TEST_CASE("totals at reference states") {
  auto grid = make_grid(Grid(2, {4, 3}, {2.0, 0.5}));
  const double V = grid->volume();
  for (const auto& p : all_presets()) {
    const auto& m = p.material;
    BoundaryParams b;
    b.K_Gamma = 0.0;
    b.p0 = 0.0;
    const auto liquid = totals(State::uniform(grid, m.theta_c, 0.0, 1.0), m, b);
    CHECK(liquid.E == doctest::Approx(m.c * m.theta_c * V + m.L * V).epsilon(1e-14));
    CHECK(liquid.S == doctest::Approx(m.L / m.theta_c * V).epsilon(1e-14));
    CHECK(liquid.X_Omega == 0.0);
    CHECK(liquid.E_Gamma == 0.0);
    CHECK(liquid.P_gauge == 0.0);

    const auto solid = totals(State::uniform(grid, m.theta_c, 0.0, 0.0), m, b);
    CHECK(solid.S == 0.0);
    CHECK(solid.X_Omega == doctest::Approx(V).epsilon(1e-15));
  }
}

TEST_CASE("totals equal an independent cell loop") {
  std::mt19937_64 rng(3);
  auto grid = make_grid(Grid(3, {3, 2, 4}, {1.0, 0.5, 2.0}));
  for (const auto& p : all_presets()) {
    const auto& m = p.material;
    BoundaryParams b;
    b.K_Gamma = 0.7 * m.lambda;
    b.p0 = 1e-3 * m.lambda;
    const State s = random_state(grid, rng, m);
    double E = 0.0, S = 0.0, U = 0.0, X = 0.0;
    const double c0 = m.c / m.rho0;
    const double L0 = m.L / m.rho0;
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
      const double th = s.theta[i];
      const double strain = s.U[i] - m.alpha * (1.0 - s.chi[i]);
      // e = c0 theta + lambda/(2 rho0) strain^2 + beta theta_c U / rho0 + L0 chi
      E += m.rho0 * (c0 * th + 0.5 * m.lambda / m.rho0 * strain * strain +
                     m.beta * m.theta_c * s.U[i] / m.rho0 + L0 * s.chi[i]) *
           grid->cell_volume();
      S += m.rho0 * (c0 * std::log(th / m.theta_c) + m.beta * s.U[i] / m.rho0 + L0 * s.chi[i] / m.theta_c) *
           grid->cell_volume();
      U += s.U[i] * grid->cell_volume();
      X += (1.0 - s.chi[i]) * grid->cell_volume();
    }
    const auto t = totals(s, m, b);
    CHECK(t.E == doctest::Approx(E).epsilon(1e-13));
    CHECK(t.S == doctest::Approx(S).epsilon(1e-12));
    CHECK(t.U_Omega == doctest::Approx(U).epsilon(1e-13));
    CHECK(t.X_Omega == doctest::Approx(X).epsilon(1e-13));
    CHECK(t.P_gauge == doctest::Approx(b.p0 + b.K_Gamma * U).epsilon(1e-13));
    CHECK(t.E_Gamma == doctest::Approx(0.5 * b.K_Gamma * (U + b.p0 / b.K_Gamma) * (U + b.p0 / b.K_Gamma))
                           .epsilon(1e-12));
  }
}

TEST_CASE("equilibrium trajectory has zero residual and production") {
  auto grid = make_grid(Grid(2, {8, 8}, {1.0, 1.0}));
  const auto m = normalized_preset().material;
  BoundaryParams b;
  b.theta_Gamma = m.theta_c;
  SolverConfig cfg;
  cfg.dt = 0.01;
  RunOptions options;
  options.t_end = 0.5;
  const auto result = run(State::uniform(grid, m.theta_c, 0.0, 1.0), m, b, cfg, options);
  const double scale = result.trajectory[0].E / cfg.dt;
  for (std::size_t k = 1; k < result.trajectory.size(); ++k) {
    const auto& r = result.trajectory[k];
    CHECK(std::abs(r.energy_residual) <= 1e-12 * scale);
    CHECK(r.entropy_production == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.Psi == doctest::Approx(result.trajectory[0].Psi).epsilon(1e-14));
  }
}

TEST_CASE("entropy production is nonnegative for arbitrary admissible steps") {
  std::mt19937_64 rng(17);
  auto grid = make_grid(Grid(2, {6, 5}, {1.0, 1.0}));
  for (const auto& p : all_presets()) {
    const auto& m = p.material;
    BoundaryParams b;
    b.theta_Gamma = 0.9 * m.theta_c;
    for (int trial = 0; trial < 30; ++trial) {
      State prev = random_state(grid, rng, m);
      State next = random_state(grid, rng, m);
      next.t = 0.1;
      CHECK(entropy_production(prev, next, 0.1, m, b) >= 0.0);
    }
  }
}

TEST_CASE("uniform insulated energy residual matches the scalar oracle") {
  auto grid = make_grid(Grid(2, {3, 4}, {1.0, 1.0}));
  const auto m = normalized_preset().material;
  BoundaryParams b;
  b.h_faces = {0.0};
  b.theta_Gamma = 1.0;
  SolverConfig cfg;
  cfg.dt = 1e-2;
  const double V = grid->volume();
  auto energy = [&](const oracle::Scalar& s) {
    const double strain = s.U - m.alpha * (1.0 - s.chi);
    const double U_Omega = s.U * V;
    return V * (m.c * s.theta + 0.5 * m.lambda * strain * strain + m.beta * m.theta_c * s.U +
                m.L * s.chi) +
           0.5 * b.K_Gamma * (U_Omega + b.p0 / b.K_Gamma) * (U_Omega + b.p0 / b.K_Gamma);
  };
  State state = State::uniform(grid, 0.6, 0.0, 1.0);
  oracle::Scalar s{0.6, 0.0, 1.0};
  DiagnosticsRecord record = initial_record(state, m, b);
  double largest = 0.0;
  for (int n = 0; n < 300; ++n) {
    const auto next = step(state, m, b, cfg).first;
    const auto next_record = step_record(state, record, next, m, b);
    const auto s_next = oracle::scalar_step(s, cfg.dt, V, m, b);
    const double oracle_residual = (energy(s_next) - energy(s)) / cfg.dt;
    CHECK(std::abs(next_record.energy_residual - oracle_residual) <= 1e-12 * energy(s) / cfg.dt);
    largest = std::max(largest, std::abs(oracle_residual));
    state = next;
    record = next_record;
    s = s_next;
  }
  // The residual is a genuine time-discretization error, not zero.
  CHECK(largest > 1e-6);
}

TEST_CASE("energy and entropy balance residuals are first order in dt") {
  const auto coarse = freezing_run(32, 2e-3, 2.0);
  const auto fine = freezing_run(32, 1e-3, 2.0);
  REQUIRE_FALSE(coarse.failure);
  REQUIRE_FALSE(fine.failure);
  auto energy = [](const DiagnosticsRecord&, const DiagnosticsRecord& r) { return r.energy_residual; };
  auto entropy = [](const DiagnosticsRecord& p, const DiagnosticsRecord& r) {
    return (r.S - p.S) / r.dt - r.boundary_entropy_inflow - r.entropy_production;
  };
  const double e_ratio = rms_of(fine.trajectory, energy) / rms_of(coarse.trajectory, energy);
  const double s_ratio = rms_of(fine.trajectory, entropy) / rms_of(coarse.trajectory, entropy);
  INFO("energy ratio " << e_ratio << " entropy ratio " << s_ratio);
  CHECK(e_ratio >= 0.4);
  CHECK(e_ratio <= 0.6);
  CHECK(s_ratio >= 0.4);
  CHECK(s_ratio <= 0.6);
}

TEST_CASE("Psi decrement matches the dissipation to second order locally") {
  std::mt19937_64 rng(5);
  auto grid = make_grid(Grid::line(16, 1.0));
  const auto m = normalized_preset().material;
  BoundaryParams b;
  b.theta_Gamma = 0.8;
  const State start = random_state(grid, rng, m);
  const auto record0 = initial_record(start, m, b);
  auto defect = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    const auto next = step(start, m, b, cfg).first;
    const auto r = step_record(start, record0, next, m, b);
    return std::abs(record0.Psi - r.Psi -
                    dt * (b.theta_Gamma * r.entropy_production + r.boundary_dissipation));
  };
  const double d1 = defect(1e-4);
  const double d2 = defect(5e-5);
  const double d3 = defect(2.5e-5);
  INFO(d1 << " " << d2 << " " << d3);
  CHECK(d1 / d2 >= 3.0);
  CHECK(d2 / d3 >= 3.0);
}

TEST_CASE("Psi is nonincreasing and production nonnegative along runs") {
  for (double theta_Gamma : {0.5, 0.9, 1.05}) {
    const auto result = freezing_run(32, 1e-3, 3.0, theta_Gamma);
    REQUIRE_FALSE(result.failure);
    const double slack = 1e-8 * std::abs(result.trajectory[0].Psi);
    CHECK(result.max_lyapunov_increase <= slack);
    CHECK(result.min_entropy_production >= 0.0);
    CHECK(std::isfinite(result.cumulative_dissipation));
    CHECK(result.cumulative_dissipation >= 0.0);
    for (std::size_t k = 1; k < result.trajectory.size(); ++k) {
      CHECK(result.trajectory[k].Psi <= result.trajectory[k - 1].Psi + slack);
    }
  }
}

TEST_CASE("steady-state measure decays by six orders at detection") {
  auto grid = make_grid(Grid::line(64, 1.0));
  const auto m = normalized_preset().material;
  for (double theta_Gamma : {0.5, 0.9, 1.05}) {
    BoundaryParams b;
    b.theta_Gamma = theta_Gamma;
    RunOptions options;
    options.t_end = 200.0;
    options.stop_at_steady = true;
    const auto result = run(State::uniform(grid, 1.0, 0.0, 1.0), m, b, SolverConfig{}, options);
    REQUIRE_FALSE(result.failure);
    CHECK(result.reached_steady);
    const double initial = std::sqrt(result.trajectory[1].steady_measure);
    const double final = std::sqrt(result.final_record.steady_measure);
    CHECK(final <= 1e-6 * initial);
  }
}

TEST_CASE("lower envelope") {
  CHECK(lower_envelope(1.0, 0.0) == 1.0);
  CHECK(lower_envelope(0.5, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(lower_envelope(2.0, 1.0) < 2.0);
}

TEST_CASE("envelope check on a constant trajectory and a freezing run") {
  auto grid = make_grid(Grid::line(16, 1.0));
  const auto m = normalized_preset().material;
  BoundaryParams b;
  b.theta_Gamma = 0.7;
  RunOptions options;
  options.t_end = 1.0;
  const auto constant = run(State::uniform(grid, 0.7, 0.0, 1.0), m, b, SolverConfig{}, options);
  EnvelopeOptions env;
  env.theta_low = 0.7;
  const auto a = envelope_check(constant.trajectory, env);
  CHECK(a.ok);
  CHECK(a.lower_envelope_checked);
  CHECK(a.min_ratio >= 1.0);

  const auto freezing = freezing_run(32, 1e-3, 10.0, 0.5);
  env.theta_low = 0.5;
  env.theta_high = 1.5;
  const auto r = envelope_check(freezing.trajectory, env);
  CHECK(r.ok);
  CHECK(r.min_ratio >= 0.95);
  CHECK(r.theta_min > 0.0);
  CHECK(r.theta_max <= 1.5);
}

TEST_CASE("envelope violations report the time and cell") {
  std::vector<DiagnosticsRecord> records(3);
  for (std::size_t k = 0; k < records.size(); ++k) {
    records[k].t = 0.5 * static_cast<double>(k);
    records[k].theta_min = 1.0;
    records[k].theta_max = 1.0;
  }
  records[2].theta_min = 0.2;
  records[2].theta_min_cell = 7;
  EnvelopeOptions env;
  env.theta_low = 1.0;
  const auto r = envelope_check(records, env);
  CHECK_FALSE(r.ok);
  REQUIRE(r.violation);
  CHECK(r.violation->t == 1.0);
  CHECK(r.violation->cell == 7);
  CHECK(r.violation->bound == doctest::Approx(lower_envelope(1.0, 1.0)));

  records[2].theta_min = -1.0;
  env.normalized = false;
  const auto p = envelope_check(records, env);
  CHECK_FALSE(p.ok);
  CHECK_FALSE(p.lower_envelope_checked);
  REQUIRE(p.violation);
  CHECK(p.violation->cell == 7);

  records[2].theta_min = 1.0;
  records[1].theta_max = 5.0;
  env.theta_high = 2.0;
  const auto h = envelope_check(records, env);
  CHECK_FALSE(h.ok);
  REQUIRE(h.violation);
  CHECK(h.violation->t == 0.5);
}

TEST_CASE("water runs stay positive") {
  auto grid = make_grid(Grid::line(16, 0.1));
  const auto w = water_preset().material;
  BoundaryParams b;
  b.theta_Gamma = 253.15;
  b.h_faces = {25.0};
  b.K_Gamma = 10.0 * w.lambda / grid->volume();
  SolverConfig cfg;
  cfg.dt = 2.0;
  RunOptions options;
  options.t_end = 4000.0;
  const double U0 = w.beta * (278.15 - w.theta_c) / (w.lambda + b.K_Gamma * grid->volume());
  const auto result = run(State::uniform(grid, 278.15, U0, 1.0), w, b, cfg, options);
  REQUIRE_FALSE(result.failure);
  EnvelopeOptions env;
  env.theta_low = 253.15;
  env.normalized = false;
  const auto r = envelope_check(result.trajectory, env);
  CHECK(r.ok);
  CHECK(r.theta_min > 0.0);
  CHECK(result.min_entropy_production >= 0.0);
  CHECK(result.max_lyapunov_increase <= 1e-8 * std::abs(result.trajectory[0].Psi));
}
