#pragma once

// Scenario files: JSON configuration, run orchestration, sweeps and output files.
// The configuration schema is documented in README.md.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "icebox/diagnostics.hpp"
#include "icebox/dynamics.hpp"
#include "icebox/equilibria.hpp"
#include "icebox/model.hpp"
#include "icebox/run.hpp"

namespace icebox {

/// Initial profile of one field.
struct Profile {
  enum class Kind { constant, linear, step, random };
  Kind kind = Kind::constant;
  double value = 0.0;      ///< constant
  double from = 0.0;       ///< linear: value at the low end of `axis`
  double to = 0.0;         ///< linear: value at the high end
  double left = 0.0;       ///< step: value below `position`
  double right = 0.0;      ///< step: value at and above `position`
  double position = 0.0;   ///< step: coordinate of the jump
  double mean = 0.0;       ///< random: centre
  double amplitude = 0.0;  ///< random: half-width of the uniform perturbation
  unsigned long long seed = 0;
  int axis = 0;

  static Profile constant_value(double v);
  bool operator==(const Profile&) const = default;
};

/// Values of `profile` at the cell centres of `grid`.
Field sample_profile(const Profile& profile, const GridPtr& grid);

struct GridSpec {
  int dim = 1;
  std::vector<int> cells{64};
  std::vector<double> extent{1.0};

  Grid build() const;
  bool operator==(const GridSpec&) const = default;
};

struct SweepSpec {
  std::string parameter;  ///< "theta_Gamma" or "K_Gamma"
  std::vector<double> values;
  bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
  std::string preset = "normalized";
  MaterialParams material;
  BoundaryParams boundary;
  GridSpec grid;
  Profile theta0 = Profile::constant_value(1.0);
  Profile U0 = Profile::constant_value(0.0);
  Profile chi0 = Profile::constant_value(1.0);
  SolverConfig solver;
  double t_end = 10.0;
  /// Time-series rows every n steps (first and last rows always written).
  int output_every = 1;
  /// Field snapshots every n steps; 0 writes only the final snapshot.
  int snapshot_every = 0;
  bool stop_at_steady = true;
  double steady_rel_tol = 1e-6;
  /// Monitored upper temperature bound; unset means only finiteness is checked.
  std::optional<double> theta_high;
  std::optional<SweepSpec> sweep;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates a JSON scenario. Missing keys take the documented
/// defaults; unknown keys and invalid values throw ConfigError naming the key path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Re-emits a config in the same schema with every value explicit.
std::string emit_config(const ScenarioConfig& cfg);
/// Checks the invariants of a config built in code. Throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

/// Initial state described by the config.
State initial_state(const ScenarioConfig& cfg);

struct RunOutput {
  RunResult result;
  /// Empty when the classification does not apply (beta_tilde >= 1).
  std::optional<EquilibriumReport> prediction;
  DimensionlessGroups groups;
  EnvelopeReport envelope;
  double volume = 0.0;
  /// Time-weighted RMS of the energy balance residual over the whole run.
  double energy_residual_rms = 0.0;
  /// Rows written to the time series (output cadence applied).
  std::vector<DiagnosticsRecord> rows;
  bool ok() const { return !result.failure && envelope.ok; }
};

/// Runs the scenario. When `out_dir` is given, writes timeseries.csv,
/// snapshots/ and summary.json there.
RunOutput run_scenario(const ScenarioConfig& cfg,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct SweepRow {
  double value = 0.0;
  DimensionlessGroups groups;
  std::optional<EquilibriumReport> prediction;
  double volume = 0.0;
  bool ok = false;
  std::string error;
  double X_fraction = 0.0;
  double U_Omega = 0.0;
  double P_gauge = 0.0;
};

/// One row per value of cfg.sweep, in input order. Rows run on ICEBOX_THREADS
/// worker threads (default 1). Failures are recorded per row.
std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct RefinementRow {
  double dt = 0.0;
  bool ok = false;
  double X_Omega = 0.0;
  double U_Omega = 0.0;
  double P_gauge = 0.0;
  double energy_residual_rms = 0.0;
};

/// Runs the scenario with dt, dt/2, ..., dt/2^levels; each run writes into out_dir/dt_<k>
/// and a refinement.csv table is written to out_dir.
std::vector<RefinementRow> run_refinement(
    const ScenarioConfig& cfg, int levels,
    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Time-series CSV header.
std::string timeseries_header();
/// One CSV row in the time-series schema, 17 significant digits.
std::string timeseries_row(const DiagnosticsRecord& r);

}  // namespace icebox
