#include "icebox/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "icebox/errors.hpp"

namespace icebox {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that the
// remaining ones can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  static void fail(const std::string& path, const std::string& message) {
    throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + message);
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, key_path(key));
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key_path(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void reject_unknown() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) fail(key_path(item.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(Section::as_number(v[i], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(Section::as_number(v, path));
  }
  return out;
}

void parse_material(const json& node, MaterialParams& m) {
  Section s(node, "material");
  s.number("c", m.c);
  s.number("kappa", m.kappa);
  s.number("nu", m.nu);
  s.number("lambda", m.lambda);
  s.number("alpha", m.alpha);
  s.number("beta", m.beta);
  s.number("gamma", m.gamma);
  s.number("L", m.L);
  s.number("theta_c", m.theta_c);
  s.number("rho0", m.rho0);
  s.reject_unknown();
}

void parse_boundary(const json& node, BoundaryParams& b) {
  Section s(node, "boundary");
  s.number("K_Gamma", b.K_Gamma);
  if (const json* h = s.find("h")) b.h_faces = number_list(*h, "boundary.h");
  s.number("theta_Gamma", b.theta_Gamma);
  s.number("p0", b.p0);
  s.number("P_stand", b.P_stand);
  s.reject_unknown();
}

void parse_grid(const json& node, GridSpec& g) {
  Section s(node, "grid");
  s.integer("dim", g.dim);
  if (const json* cells = s.find("cells")) {
    g.cells.clear();
    const auto values = number_list(*cells, "grid.cells");
    for (double v : values) {
      if (v != std::floor(v)) Section::fail("grid.cells", "expected integers");
      g.cells.push_back(static_cast<int>(v));
    }
  }
  if (const json* extent = s.find("extent")) g.extent = number_list(*extent, "grid.extent");
  s.reject_unknown();
}

Profile parse_profile(const json& node, const std::string& path) {
  if (node.is_number()) return Profile::constant_value(node.get<double>());
  Section s(node, path);
  std::string kind;
  s.text("profile", kind);
  Profile p;
  if (kind == "constant") {
    p.kind = Profile::Kind::constant;
    s.number("value", p.value);
  } else if (kind == "linear") {
    p.kind = Profile::Kind::linear;
    s.number("from", p.from);
    s.number("to", p.to);
    s.integer("axis", p.axis);
  } else if (kind == "step") {
    p.kind = Profile::Kind::step;
    s.number("left", p.left);
    s.number("right", p.right);
    s.number("position", p.position);
    s.integer("axis", p.axis);
  } else if (kind == "random") {
    p.kind = Profile::Kind::random;
    s.number("mean", p.mean);
    s.number("amplitude", p.amplitude);
    if (const json* seed = s.find("seed")) {
      if (!seed->is_number_unsigned()) Section::fail(path + ".seed", "expected a nonnegative integer");
      p.seed = seed->get<unsigned long long>();
    }
  } else {
    Section::fail(path + ".profile", "expected constant, linear, step or random");
  }
  s.reject_unknown();
  return p;
}

void parse_initial(const json& node, ScenarioConfig& cfg) {
  Section s(node, "initial");
  if (const json* v = s.find("theta")) cfg.theta0 = parse_profile(*v, "initial.theta");
  if (const json* v = s.find("U")) cfg.U0 = parse_profile(*v, "initial.U");
  if (const json* v = s.find("chi")) cfg.chi0 = parse_profile(*v, "initial.chi");
  s.reject_unknown();
}

void parse_solver(const json& node, SolverConfig& solver) {
  Section s(node, "solver");
  s.number("dt", solver.dt);
  s.number("picard_tol", solver.picard_tol);
  s.integer("picard_max", solver.picard_max);
  if (const json* R = s.find("truncation_R")) {
    solver.truncation_R = R->is_null() ? std::numeric_limits<double>::infinity()
                                       : Section::as_number(*R, "solver.truncation_R");
  }
  s.number("scalar_root_tol", solver.scalar_root_tol);
  std::string mode;
  s.text("mode", mode);
  if (mode == "picard") {
    solver.mode = CouplingMode::picard;
  } else if (mode == "staggered") {
    solver.mode = CouplingMode::staggered;
  } else if (!mode.empty()) {
    Section::fail("solver.mode", "expected staggered or picard");
  }
  s.reject_unknown();
}

void parse_run(const json& node, ScenarioConfig& cfg) {
  Section s(node, "run");
  s.number("t_end", cfg.t_end);
  s.integer("output_every", cfg.output_every);
  s.integer("snapshot_every", cfg.snapshot_every);
  s.boolean("stop_at_steady", cfg.stop_at_steady);
  s.number("steady_rel_tol", cfg.steady_rel_tol);
  if (const json* v = s.find("theta_high")) {
    if (v->is_null()) {
      cfg.theta_high.reset();
    } else {
      cfg.theta_high = Section::as_number(*v, "run.theta_high");
    }
  }
  s.reject_unknown();
}

void parse_sweep(const json& node, ScenarioConfig& cfg) {
  Section s(node, "sweep");
  SweepSpec sweep;
  s.text("parameter", sweep.parameter);
  if (const json* v = s.find("values")) {
    if (!v->is_array()) Section::fail("sweep.values", "expected an array");
    sweep.values = number_list(*v, "sweep.values");
  }
  s.reject_unknown();
  cfg.sweep = std::move(sweep);
}

void check(bool condition, const std::string& path, const std::string& message) {
  if (!condition) Section::fail(path, message);
}

json profile_json(const Profile& p) {
  switch (p.kind) {
    case Profile::Kind::constant:
      return p.value;
    case Profile::Kind::linear:
      return {{"profile", "linear"}, {"from", p.from}, {"to", p.to}, {"axis", p.axis}};
    case Profile::Kind::step:
      return {{"profile", "step"},
              {"left", p.left},
              {"right", p.right},
              {"position", p.position},
              {"axis", p.axis}};
    case Profile::Kind::random:
      return {{"profile", "random"}, {"mean", p.mean}, {"amplitude", p.amplitude},
              {"seed", p.seed}};
  }
  return nullptr;
}

// Range of values a profile can take (exact for all kinds).
std::pair<double, double> profile_range(const Profile& p) {
  switch (p.kind) {
    case Profile::Kind::constant: return {p.value, p.value};
    case Profile::Kind::linear: return {std::min(p.from, p.to), std::max(p.from, p.to)};
    case Profile::Kind::step: return {std::min(p.left, p.right), std::max(p.left, p.right)};
    case Profile::Kind::random: return {p.mean - p.amplitude, p.mean + p.amplitude};
  }
  return {0.0, 0.0};
}

void validate_profile(const Profile& p, int dim, const std::string& path) {
  const auto values = {p.value, p.from, p.to, p.left, p.right, p.position, p.mean, p.amplitude};
  for (double v : values) check(std::isfinite(v), path, "values must be finite");
  if (p.kind == Profile::Kind::linear || p.kind == Profile::Kind::step) {
    check(p.axis >= 0 && p.axis < dim, path + ".axis", "must name a grid axis");
  }
  if (p.kind == Profile::Kind::random) check(p.amplitude >= 0.0, path + ".amplitude", "must be >= 0");
}

std::string format_number(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_snapshot(const std::filesystem::path& path, const State& state) {
  const Grid& grid = state.grid();
  static const char* axes[] = {"x", "y", "z"};
  std::string text = "index";
  for (int a = 0; a < grid.dim(); ++a) text += std::string(",") + axes[a];
  text += ",theta,U,chi\n";
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    text += std::to_string(i);
    const auto x = grid.center(i);
    for (int a = 0; a < grid.dim(); ++a) text += "," + format_number(x[a]);
    text += "," + format_number(state.theta[i]) + "," + format_number(state.U[i]) + "," +
            format_number(state.chi[i]) + "\n";
  }
  write_text(path, text);
}

json report_json(const EquilibriumReport& r) {
  json out = {{"regime", to_string(r.regime)},
              {"X_Omega", r.X_Omega_inf},
              {"U_Omega", r.U_Omega_inf},
              {"U_inf", r.U_inf},
              {"P_gauge", r.P_inf},
              {"theta_liquid", r.thresholds.theta_liquid},
              {"theta_solid", r.thresholds.theta_solid}};
  out["chi_inf"] = r.chi_inf ? json(*r.chi_inf) : json("nonunique");
  return out;
}

json summary_json(const ScenarioConfig& cfg, const RunOutput& out) {
  const auto& fin = out.result.final_record;
  json s;
  s["status"] = out.result.failure ? "failed" : (out.envelope.ok ? "ok" : "envelope_violation");
  if (out.result.failure) {
    s["failure"] = {{"t", out.result.failure->t}, {"message", out.result.failure->message}};
  }
  s["steps"] = out.result.steps;
  s["reached_steady"] = out.result.reached_steady;
  s["volume"] = out.volume;
  s["final"] = {{"t", fin.t},
                {"X_Omega", fin.X_Omega},
                {"X_fraction", fin.X_Omega / out.volume},
                {"U_Omega", fin.U_Omega},
                {"P_gauge", fin.P_gauge},
                {"Psi", fin.Psi},
                {"theta_min", fin.theta_min},
                {"theta_max", fin.theta_max},
                {"rate_norm", fin.rate_norm}};
  s["groups"] = {{"d", out.groups.d},
                 {"beta_tilde", out.groups.beta_tilde},
                 {"omega", out.groups.omega},
                 {"L_beta", out.groups.L_beta}};
  if (out.prediction) {
    s["prediction"] = report_json(*out.prediction);
    s["difference"] = {{"X_fraction", (fin.X_Omega - out.prediction->X_Omega_inf) / out.volume},
                       {"U_Omega", fin.U_Omega - out.prediction->U_Omega_inf},
                       {"P_gauge", fin.P_gauge - out.prediction->P_inf}};
  } else {
    s["prediction"] = nullptr;
  }
  s["thermodynamics"] = {{"min_entropy_production", out.result.min_entropy_production},
                         {"max_lyapunov_increase", out.result.max_lyapunov_increase},
                         {"cumulative_dissipation", out.result.cumulative_dissipation},
                         {"energy_residual_rms", out.energy_residual_rms},
                         {"max_picard_iterations", out.result.max_picard_iterations}};
  json envelope = {{"ok", out.envelope.ok},
                   {"lower_envelope_checked", out.envelope.lower_envelope_checked},
                   {"theta_min", out.envelope.theta_min},
                   {"theta_max", out.envelope.theta_max}};
  if (out.envelope.lower_envelope_checked) envelope["min_ratio"] = out.envelope.min_ratio;
  if (out.envelope.violation) {
    const auto& v = *out.envelope.violation;
    envelope["violation"] = {
        {"t", v.t}, {"cell", v.cell}, {"theta", v.theta}, {"bound", v.bound}, {"what", v.what}};
  }
  s["envelope"] = envelope;
  s["config"] = json::parse(emit_config(cfg));
  return s;
}

int thread_count() {
  const char* env = std::getenv("ICEBOX_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) {
    throw ConfigError("ICEBOX_THREADS: expected a positive integer");
  }
  return static_cast<int>(std::min<long>(n, 256));
}

}  // namespace

Profile Profile::constant_value(double v) {
  Profile p;
  p.value = v;
  return p;
}

Field sample_profile(const Profile& p, const GridPtr& grid) {
  std::vector<double> values(grid->cell_count());
  std::mt19937_64 engine(p.seed);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = grid->center(i)[p.axis];
    switch (p.kind) {
      case Profile::Kind::constant:
        values[i] = p.value;
        break;
      case Profile::Kind::linear:
        values[i] = p.from + (p.to - p.from) * x / grid->extent(p.axis);
        break;
      case Profile::Kind::step:
        values[i] = x < p.position ? p.left : p.right;
        break;
      case Profile::Kind::random: {
        // 53 random bits mapped to [0,1): identical across standard libraries.
        const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        values[i] = p.mean + p.amplitude * (2.0 * u - 1.0);
        break;
      }
    }
  }
  return Field(grid, std::move(values));
}

Grid GridSpec::build() const {
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> e{1.0, 1.0, 1.0};
  for (int a = 0; a < dim; ++a) {
    n[a] = cells.size() == 1 ? cells[0] : cells[a];
    e[a] = extent.size() == 1 ? extent[0] : extent[a];
  }
  return Grid(dim, n, e);
}

void validate_config(const ScenarioConfig& cfg) {
  try {
    cfg.material.validate();
  } catch (const std::invalid_argument& e) {
    Section::fail("material", e.what());
  }
  const auto& b = cfg.boundary;
  check(std::isfinite(b.K_Gamma) && b.K_Gamma >= 0.0, "boundary.K_Gamma", "must be >= 0");
  check(std::isfinite(b.theta_Gamma) && b.theta_Gamma > 0.0, "boundary.theta_Gamma",
        "must be positive");
  check(std::isfinite(b.p0), "boundary.p0", "must be finite");
  check(std::isfinite(b.P_stand) && b.P_stand > 0.0, "boundary.P_stand", "must be positive");
  check(!b.h_faces.empty(), "boundary.h", "must not be empty");
  for (double h : b.h_faces) check(std::isfinite(h) && h >= 0.0, "boundary.h", "h >= 0 on every face");
  check(*std::max_element(b.h_faces.begin(), b.h_faces.end()) > 0.0, "boundary.h",
        "at least one h > 0");

  const auto& g = cfg.grid;
  check(g.dim >= 1 && g.dim <= 3, "grid.dim", "must be 1, 2 or 3");
  const std::size_t dim = static_cast<std::size_t>(g.dim);
  check(g.cells.size() == 1 || g.cells.size() == dim, "grid.cells", "expected 1 or dim entries");
  check(g.extent.size() == 1 || g.extent.size() == dim, "grid.extent", "expected 1 or dim entries");
  for (int n : g.cells) check(n >= 1, "grid.cells", "must be >= 1");
  for (double e : g.extent) check(std::isfinite(e) && e > 0.0, "grid.extent", "must be positive");
  const std::size_t sides = 2 * dim;
  if (b.h_faces.size() != 1 && b.h_faces.size() != sides) {
    const std::size_t faces = g.build().boundary_faces().size();
    check(b.h_faces.size() == faces, "boundary.h",
          "expected 1, " + std::to_string(sides) + " or " + std::to_string(faces) + " entries");
  }

  validate_profile(cfg.theta0, g.dim, "initial.theta");
  validate_profile(cfg.U0, g.dim, "initial.U");
  validate_profile(cfg.chi0, g.dim, "initial.chi");
  check(profile_range(cfg.theta0).first > 0.0, "initial.theta", "theta0 must be positive");
  const auto chi = profile_range(cfg.chi0);
  check(chi.first >= 0.0 && chi.second <= 1.0, "initial.chi", "chi0 in [0,1]");

  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    Section::fail("solver", e.what());
  }
  check(std::isfinite(cfg.t_end) && cfg.t_end > 0.0, "run.t_end", "must be positive");
  check(cfg.output_every >= 1, "run.output_every", "must be >= 1");
  check(cfg.snapshot_every >= 0, "run.snapshot_every", "must be >= 0");
  check(cfg.steady_rel_tol > 0.0 && cfg.steady_rel_tol < 1.0, "run.steady_rel_tol",
        "must lie in (0,1)");
  if (cfg.theta_high) check(*cfg.theta_high > 0.0, "run.theta_high", "must be positive");

  if (cfg.sweep) {
    const auto& s = *cfg.sweep;
    check(s.parameter == "theta_Gamma" || s.parameter == "K_Gamma", "sweep.parameter",
          "expected theta_Gamma or K_Gamma");
    check(!s.values.empty(), "sweep.values", "must not be empty");
    for (double v : s.values) {
      check(std::isfinite(v), "sweep.values", "must be finite");
      if (s.parameter == "theta_Gamma") check(v > 0.0, "sweep.values", "theta_Gamma must be positive");
      if (s.parameter == "K_Gamma") check(v >= 0.0, "sweep.values", "K_Gamma must be >= 0");
    }
  }
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  Section s(root, "");
  ScenarioConfig cfg;
  s.text("preset", cfg.preset);
  try {
    cfg.material = find_preset(cfg.preset).material;
  } catch (const std::invalid_argument& e) {
    Section::fail("preset", e.what());
  }
  if (const json* v = s.find("material")) parse_material(*v, cfg.material);
  if (const json* v = s.find("boundary")) parse_boundary(*v, cfg.boundary);
  if (const json* v = s.find("grid")) parse_grid(*v, cfg.grid);
  if (const json* v = s.find("initial")) parse_initial(*v, cfg);
  if (const json* v = s.find("solver")) parse_solver(*v, cfg.solver);
  if (const json* v = s.find("run")) parse_run(*v, cfg);
  if (const json* v = s.find("sweep")) parse_sweep(*v, cfg);
  s.reject_unknown();
  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string emit_config(const ScenarioConfig& cfg) {
  const auto& m = cfg.material;
  const auto& b = cfg.boundary;
  json root;
  root["preset"] = cfg.preset;
  root["material"] = {{"c", m.c},         {"kappa", m.kappa}, {"nu", m.nu},
                      {"lambda", m.lambda}, {"alpha", m.alpha}, {"beta", m.beta},
                      {"gamma", m.gamma}, {"L", m.L},         {"theta_c", m.theta_c},
                      {"rho0", m.rho0}};
  root["boundary"] = {{"K_Gamma", b.K_Gamma},
                      {"h", b.h_faces},
                      {"theta_Gamma", b.theta_Gamma},
                      {"p0", b.p0},
                      {"P_stand", b.P_stand}};
  root["grid"] = {{"dim", cfg.grid.dim}, {"cells", cfg.grid.cells}, {"extent", cfg.grid.extent}};
  root["initial"] = {{"theta", profile_json(cfg.theta0)},
                     {"U", profile_json(cfg.U0)},
                     {"chi", profile_json(cfg.chi0)}};
  const auto& sv = cfg.solver;
  root["solver"] = {{"dt", sv.dt},
                    {"picard_tol", sv.picard_tol},
                    {"picard_max", sv.picard_max},
                    {"scalar_root_tol", sv.scalar_root_tol},
                    {"mode", sv.mode == CouplingMode::picard ? "picard" : "staggered"}};
  root["solver"]["truncation_R"] =
      std::isinf(sv.truncation_R) ? json(nullptr) : json(sv.truncation_R);
  root["run"] = {{"t_end", cfg.t_end},
                 {"output_every", cfg.output_every},
                 {"snapshot_every", cfg.snapshot_every},
                 {"stop_at_steady", cfg.stop_at_steady},
                 {"steady_rel_tol", cfg.steady_rel_tol}};
  root["run"]["theta_high"] = cfg.theta_high ? json(*cfg.theta_high) : json(nullptr);
  if (cfg.sweep) {
    root["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
  }
  return root.dump(2) + "\n";
}

State initial_state(const ScenarioConfig& cfg) {
  const GridPtr grid = make_grid(cfg.grid.build());
  State state{sample_profile(cfg.theta0, grid), sample_profile(cfg.U0, grid),
              sample_profile(cfg.chi0, grid), 0.0};
  state.validate();
  return state;
}

std::string timeseries_header() {
  return "t,E,S,E_Gamma,Psi,U_Omega,X_Omega,P_gauge,entropy_production,energy_residual,"
         "theta_min,theta_max,rate_norm";
}

std::string timeseries_row(const DiagnosticsRecord& r) {
  const double values[] = {r.t,         r.E,         r.S,
                           r.E_Gamma,   r.Psi,       r.U_Omega,
                           r.X_Omega,   r.P_gauge,   r.entropy_production,
                           r.energy_residual, r.theta_min, r.theta_max,
                           r.rate_norm};
  std::string row;
  for (double v : values) {
    if (!row.empty()) row += ",";
    row += format_number(v);
  }
  return row;
}

RunOutput run_scenario(const ScenarioConfig& cfg,
                       const std::optional<std::filesystem::path>& out_dir) {
  validate_config(cfg);
  const State state0 = initial_state(cfg);
  const MaterialParams& m = cfg.material;
  const BoundaryParams& b = cfg.boundary;

  RunOutput out;
  out.volume = state0.grid().volume();
  out.groups = dimensionless_groups(m, b, out.volume);
  try {
    out.prediction = classify(b.theta_Gamma, out.groups, m, b, out.volume);
  } catch (const std::domain_error&) {
    out.prediction.reset();
  }

  std::optional<std::filesystem::path> snapshot_dir;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    snapshot_dir = *out_dir / "snapshots";
    std::filesystem::create_directories(*snapshot_dir);
    if (cfg.snapshot_every > 0) write_snapshot(*snapshot_dir / "step_000000.csv", state0);
  }

  RunOptions options;
  options.t_end = cfg.t_end;
  options.record_every = cfg.output_every;
  options.stop_at_steady = cfg.stop_at_steady;
  options.steady_rel_tol = cfg.steady_rel_tol;

  double residual_sq = 0.0;
  double elapsed = 0.0;
  long step_index = 0;
  std::vector<Observer> observers;
  observers.push_back([&](const State& s, const DiagnosticsRecord& r, const StepReport&) {
    residual_sq += r.energy_residual * r.energy_residual * r.dt;
    elapsed += r.dt;
    ++step_index;
    if (snapshot_dir && cfg.snapshot_every > 0 && step_index % cfg.snapshot_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06ld.csv", step_index);
      write_snapshot(*snapshot_dir / name, s);
    }
  });

  out.result = run(state0, m, b, cfg.solver, options, observers);
  out.rows = out.result.trajectory;
  out.energy_residual_rms = elapsed > 0.0 ? std::sqrt(residual_sq / elapsed) : 0.0;

  EnvelopeOptions envelope;
  envelope.theta_low = std::min(state0.theta.min(), b.theta_Gamma);
  envelope.theta_high = cfg.theta_high;
  envelope.normalized = m == normalized_preset().material;
  out.envelope = envelope_check(out.rows, envelope);

  if (out_dir) {
    std::string csv = timeseries_header() + "\n";
    for (const auto& r : out.rows) csv += timeseries_row(r) + "\n";
    write_text(*out_dir / "timeseries.csv", csv);
    write_snapshot(*snapshot_dir / "final.csv", out.result.final_state);
    write_text(*out_dir / "summary.json", summary_json(cfg, out).dump(2) + "\n");
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir) {
  if (!cfg.sweep || cfg.sweep->values.empty()) {
    throw ConfigError("sweep.values: must not be empty");
  }
  validate_config(cfg);
  const auto& sweep = *cfg.sweep;
  std::vector<SweepRow> rows(sweep.values.size());

  auto evaluate = [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.value = sweep.values[k];
    ScenarioConfig one = cfg;
    one.sweep.reset();
    if (sweep.parameter == "theta_Gamma") {
      one.boundary.theta_Gamma = row.value;
    } else {
      one.boundary.K_Gamma = row.value;
    }
    try {
      const RunOutput out = run_scenario(one);
      row.groups = out.groups;
      row.prediction = out.prediction;
      row.volume = out.volume;
      row.X_fraction = out.result.final_record.X_Omega / out.volume;
      row.U_Omega = out.result.final_record.U_Omega;
      row.P_gauge = out.result.final_record.P_gauge;
      row.ok = out.ok();
      if (out.result.failure) {
        row.error = "t = " + format_number(out.result.failure->t) + ": " +
                    out.result.failure->message;
      } else if (!out.envelope.ok) {
        row.error = out.envelope.violation->what;
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  };

  const int threads = std::min<int>(thread_count(), static_cast<int>(rows.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < rows.size(); ++k) evaluate(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) evaluate(k);
      });
    }
    for (auto& worker : pool) worker.join();
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::string csv =
        sweep.parameter +
        ",d,beta_tilde,omega,theta_liquid,theta_solid,regime,X_fraction_predicted,"
        "X_fraction_simulated,U_Omega_predicted,U_Omega_simulated,P_predicted,P_simulated,"
        "status\n";
    for (const auto& row : rows) {
      csv += format_number(row.value) + "," + format_number(row.groups.d) + "," +
             format_number(row.groups.beta_tilde) + "," + format_number(row.groups.omega) + ",";
      if (row.prediction) {
        const auto& p = *row.prediction;
        csv += format_number(p.thresholds.theta_liquid) + "," +
               format_number(p.thresholds.theta_solid) + "," + to_string(p.regime) + "," +
               format_number(p.X_Omega_inf / row.volume) + ",";
      } else {
        csv += ",,unclassified,,";
      }
      csv += format_number(row.X_fraction) + ",";
      csv += (row.prediction ? format_number(row.prediction->U_Omega_inf) : "") + ",";
      csv += format_number(row.U_Omega) + ",";
      csv += (row.prediction ? format_number(row.prediction->P_inf) : "") + ",";
      csv += format_number(row.P_gauge) + ",";
      std::string status = row.ok ? "ok" : "failed: " + row.error;
      std::replace(status.begin(), status.end(), ',', ';');
      std::replace(status.begin(), status.end(), '\n', ' ');
      csv += status + "\n";
    }
    write_text(*out_dir / "sweep.csv", csv);
  }
  return rows;
}

std::vector<RefinementRow> run_refinement(const ScenarioConfig& cfg, int levels,
                                          const std::optional<std::filesystem::path>& out_dir) {
  if (levels < 0) throw ConfigError("dt-halve: expected a nonnegative number of levels");
  std::vector<RefinementRow> rows;
  for (int k = 0; k <= levels; ++k) {
    ScenarioConfig level = cfg;
    level.solver.dt = cfg.solver.dt / std::ldexp(1.0, k);
    level.output_every = cfg.output_every << k;
    if (cfg.snapshot_every > 0) level.snapshot_every = cfg.snapshot_every << k;
    std::optional<std::filesystem::path> dir;
    if (out_dir) dir = *out_dir / ("dt_" + std::to_string(k));
    const RunOutput out = run_scenario(level, dir);
    RefinementRow row;
    row.dt = level.solver.dt;
    row.ok = out.ok();
    row.X_Omega = out.result.final_record.X_Omega;
    row.U_Omega = out.result.final_record.U_Omega;
    row.P_gauge = out.result.final_record.P_gauge;
    row.energy_residual_rms = out.energy_residual_rms;
    rows.push_back(row);
  }
  if (out_dir) {
    std::string csv = "dt,status,X_Omega,U_Omega,P_gauge,energy_residual_rms\n";
    for (const auto& r : rows) {
      csv += format_number(r.dt) + "," + (r.ok ? "ok" : "failed") + "," + format_number(r.X_Omega) +
             "," + format_number(r.U_Omega) + "," + format_number(r.P_gauge) + "," +
             format_number(r.energy_residual_rms) + "\n";
    }
    write_text(*out_dir / "refinement.csv", csv);
  }
  return rows;
}

}  // namespace icebox
