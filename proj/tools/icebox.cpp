// Command-line driver: run, sweep, equilibria, presets.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "icebox/equilibria.hpp"
#include "icebox/errors.hpp"
#include "icebox/scenario.hpp"

namespace fs = std::filesystem;
using namespace icebox;

namespace {

void apply_mode(ScenarioConfig& cfg, const std::string& mode) {
  if (mode == "picard") {
    cfg.solver.mode = CouplingMode::picard;
  } else if (mode == "staggered") {
    cfg.solver.mode = CouplingMode::staggered;
  }
}

int command_run(const ScenarioConfig& cfg, const fs::path& out, int halvings) {
  if (halvings > 0) {
    const auto rows = run_refinement(cfg, halvings, out);
    bool ok = true;
    for (const auto& r : rows) {
      std::printf("dt=%-12.6g X_Omega=%.10g U_Omega=%.10g P_gauge=%.10g residual_rms=%.4g %s\n",
                  r.dt, r.X_Omega, r.U_Omega, r.P_gauge, r.energy_residual_rms,
                  r.ok ? "ok" : "FAILED");
      ok = ok && r.ok;
    }
    return ok ? 0 : 1;
  }

  const RunOutput output = run_scenario(cfg, out);
  const auto& fin = output.result.final_record;
  std::printf("t=%.6g steps=%ld steady=%s\n", fin.t, output.result.steps,
              output.result.reached_steady ? "yes" : "no");
  std::printf("X_Omega/|Omega|=%.10g U_Omega=%.10g P_gauge=%.10g\n", fin.X_Omega / output.volume,
              fin.U_Omega, fin.P_gauge);
  if (output.prediction) {
    const auto& p = *output.prediction;
    std::printf("predicted %s: X_Omega/|Omega|=%.10g U_Omega=%.10g P_gauge=%.10g\n",
                to_string(p.regime).c_str(), p.X_Omega_inf / output.volume, p.U_Omega_inf,
                p.P_inf);
  }
  if (output.result.failure) {
    std::fprintf(stderr, "solver failure at t=%.17g: %s\n", output.result.failure->t,
                 output.result.failure->message.c_str());
    return 2;
  }
  if (!output.envelope.ok) {
    const auto& v = *output.envelope.violation;
    std::fprintf(stderr, "%s at t=%.17g (cell %zu, theta=%.17g, bound=%.17g)\n", v.what.c_str(),
                 v.t, v.cell, v.theta, v.bound);
    return 3;
  }
  return 0;
}

int command_sweep(const ScenarioConfig& cfg, const fs::path& out) {
  const auto rows = run_sweep(cfg, out);
  bool ok = true;
  for (const auto& row : rows) {
    const std::string regime = row.prediction ? to_string(row.prediction->regime) : "unclassified";
    std::printf("%s=%-10.6g %-12s X/|Omega| predicted=%-10.6g simulated=%-10.6g %s\n",
                cfg.sweep->parameter.c_str(), row.value, regime.c_str(),
                row.prediction ? row.prediction->X_Omega_inf / row.volume : 0.0, row.X_fraction,
                row.ok ? "ok" : ("FAILED " + row.error).c_str());
    ok = ok && row.ok;
  }
  return ok ? 0 : 1;
}

int command_equilibria(const ScenarioConfig& cfg) {
  const double volume = cfg.grid.build().volume();
  const auto g = dimensionless_groups(cfg.material, cfg.boundary, volume);
  std::printf("d=%.10g beta_tilde=%.10g omega=%.10g L_beta=%.10g\n", g.d, g.beta_tilde, g.omega,
              g.L_beta);
  std::printf("Clausius-Clapeyron slope=%.10g J/(m^3 K)\n", clausius_clapeyron_slope(cfg.material));
  const auto report = classify(cfg.boundary.theta_Gamma, g, cfg.material, cfg.boundary, volume);
  std::printf("theta_liquid=%.10g theta_solid=%.10g\n", report.thresholds.theta_liquid,
              report.thresholds.theta_solid);
  char chi[32] = "nonunique";
  if (report.chi_inf) std::snprintf(chi, sizeof chi, "%.10g", *report.chi_inf);
  std::printf("theta_Gamma=%.10g regime=%s chi_inf=%s\n", cfg.boundary.theta_Gamma,
              to_string(report.regime).c_str(), chi);
  std::printf("X_Omega=%.10g U_Omega=%.10g U_inf=%.10g P_gauge=%.10g\n", report.X_Omega_inf,
              report.U_Omega_inf, report.U_inf, report.P_inf);
  const auto limits = limit_behaviors(cfg.material, cfg.boundary, volume);
  std::printf("K_Gamma=0:      U_inf=%.10g P-p0=%.10g d=%.10g\n", limits.compliant.U_inf,
              limits.compliant.P_minus_p0, limits.compliant.d);
  std::printf("K_Gamma=%-7.3g U_inf=%.10g P-p0=%.10g d=%.10g\n", limits.rigid.K_Gamma,
              limits.rigid.U_inf, limits.rigid.P_minus_p0, limits.rigid.d);
  std::printf("rigid limit:    P-p0=%.10g d=%.10g\n", limits.rigid_pressure_limit,
              limits.rigid_d_limit);
  return 0;
}

int command_presets() {
  for (const auto& p : all_presets()) {
    const auto& m = p.material;
    std::printf("%s\n  c=%g kappa=%g nu=%g lambda=%g alpha=%g beta=%g gamma=%g L=%g theta_c=%g "
                "rho0=%g\n  %s\n",
                p.name.c_str(), m.c, m.kappa, m.nu, m.lambda, m.alpha, m.beta, m.gamma, m.L,
                m.theta_c, m.rho0, p.notes.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Freezing of a liquid in an elastic container"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string mode;
  int halvings = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write time series, snapshots and summary");
  run->add_option("--config", config_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--dt-halve", halvings, "Also rerun with dt/2, ..., dt/2^N")->check(CLI::NonNegativeNumber);
  run->add_option("--mode", mode, "Coupling mode")->check(CLI::IsMember({"staggered", "picard"}));

  auto* sweep = app.add_subcommand("sweep", "Run the sweep section of a scenario");
  sweep->add_option("--config", config_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--mode", mode, "Coupling mode")->check(CLI::IsMember({"staggered", "picard"}));

  auto* equilibria = app.add_subcommand("equilibria", "Print dimensionless groups and the equilibrium");
  equilibria->add_option("--config", config_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);

  app.add_subcommand("presets", "List material presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("presets")) return command_presets();
    ScenarioConfig cfg = load_config(config_path);
    apply_mode(cfg, mode);
    if (app.got_subcommand(run)) return command_run(cfg, out_dir, halvings);
    if (app.got_subcommand(sweep)) {
      if (!cfg.sweep) throw ConfigError("sweep: section missing from the config");
      return command_sweep(cfg, out_dir);
    }
    return command_equilibria(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
