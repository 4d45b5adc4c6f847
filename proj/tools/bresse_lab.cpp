// bresse_lab: command-line front end for the Bresse/Timoshenko lab.
//
//   bresse_lab <experiment> --config run.cfg [--output DIR] [--workers N] [--seed S]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bresse/config.hpp"
#include "bresse/dynamics_lab.hpp"
#include "bresse/equilibria.hpp"
#include "bresse/integrator.hpp"
#include "bresse/io.hpp"

namespace fs = std::filesystem;
using namespace bresse;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Failure {
  int code;
  std::string kind;
  std::vector<std::string> messages;
};

class Run {
 public:
  explicit Run(RunConfig config) : cfg(std::move(config)), dir(cfg.output.directory) {}

  RunConfig cfg;
  fs::path dir;
  Json summary = Json::object();
  Json extra_manifest = Json::object();
  std::vector<std::string> files;
  std::optional<Failure> failure;  // set when outputs are written but the run must exit nonzero

  void csv(const std::string& name, const CsvTable& table) {
    if (!cfg.output.wants("csv")) return;
    write_file((dir / name).string(), to_csv(table));
    files.push_back(name);
  }
  void json(const std::string& name, const Json& j) {
    if (!cfg.output.wants("json")) return;
    write_file((dir / name).string(), dump(j));
    files.push_back(name);
  }

  BeamParams params() const { return cfg.params(); }
  Grid grid() const { return make_grid(cfg.model.L, cfg.grid.n); }
  StepperConfig stepper(const DiscreteOperators& ops) const {
    StepperConfig s;
    s.dt = cfg.stepper.dt > 0.0 ? cfg.stepper.dt : default_dt(ops);
    s.newton_tol = cfg.stepper.newton_tol;
    s.newton_max_iters = cfg.stepper.newton_max_iters;
    s.scheme = cfg.stepper.scheme;
    return s;
  }
  LabSettings settings() const {
    LabSettings s;
    s.stepper.dt = cfg.stepper.dt;
    s.stepper.newton_tol = cfg.stepper.newton_tol;
    s.stepper.newton_max_iters = cfg.stepper.newton_max_iters;
    s.stepper.scheme = cfg.stepper.scheme;
    s.workers = cfg.experiment.workers;
    s.stride = cfg.output.stride;
    return s;
  }
  double cap() const { return std::numbers::pi / (2.0 * cfg.model.L); }
  std::vector<double> ells(const std::vector<double>& fractions) const {
    if (!cfg.experiment.ells.empty()) return cfg.experiment.ells;
    std::vector<double> out;
    for (double f : fractions) out.push_back(f * cap());
    return out;
  }
};

BeamParams at_ell(BeamParams p, double ell) {
  p.ell = ell;
  return p;
}

void simulate_cmd(Run& run) {
  const Grid g = run.grid();
  const DiscreteOperators ops = assemble(run.params(), g);
  const ForcingModel forcing = run.cfg.forcing();
  const DampingModel damping = run.cfg.damping();
  const StepperConfig step = run.stepper(ops);
  const State initial = random_ensemble(ops, 1, run.cfg.experiment.energy, run.cfg.experiment.seed).front();
  const Trajectory traj =
      simulate(initial, run.cfg.experiment.T, ops, forcing, damping, step, {.stride = run.cfg.output.stride});

  CsvTable table{{"t", "E", "Etotal", "dissipation_rate", "cumulative_dissipation", "identity_residual"}, {}};
  for (const auto& r : traj.reports) {
    table.add({r.t, r.E, r.Etotal, r.dissipation_rate, r.cumulative_dissipation, r.identity_residual});
  }
  run.csv("trajectory.csv", table);
  CsvTable final_state{{"x", "phi", "psi", "w", "phit", "psit", "wt"}, {}};
  const State& last = traj.states.back();
  for (int j = 0; j < g.n; ++j) {
    final_state.add({g.nodes[static_cast<std::size_t>(j)], last.phi[j], last.psi[j], last.w[j], last.phit[j],
                     last.psit[j], last.wt[j]});
  }
  run.csv("final_state.csv", final_state);

  const double E0 = std::abs(traj.reports.front().Etotal);
  Json s{{"steps", traj.steps},
         {"dt", step.dt},
         {"failed", traj.failed},
         {"initial", to_json(traj.reports.front())},
         {"final", to_json(traj.final_report())},
         {"max_identity_residual", traj.max_identity_residual()},
         {"relative_identity_residual", E0 > 0.0 ? traj.max_identity_residual() / E0 : 0.0}};
  if (run.params().uniform_regime()) {
    try {
      const AnalyticConstants c = analytic_constants(run.params(), run.cfg.ell0(), forcing.beta);
      s["beta0"] = c.beta0;
      s["coercivity_violations"] = coercivity_violations(traj.reports, c.beta0, g.L, forcing.mF);
    } catch (const ConfigError& e) {
      s["coercivity_note"] = e.what();
    }
  }
  if (traj.failed) {
    s["failure"] = traj.failure;
    run.failure = Failure{3, "numerical", {"simulation stopped: " + traj.failure}};
  }
  run.summary = s;
  run.extra_manifest["dt"] = step.dt;
}

void equilibria_cmd(Run& run) {
  const Grid g = run.grid();
  const BeamParams p = run.params();
  const DiscreteOperators ops = assemble(p, g);
  const ForcingModel forcing = run.cfg.forcing();
  MultiStartOptions o;
  o.newton.tol = run.cfg.stepper.newton_tol;
  o.random_starts = run.cfg.experiment.random_starts;
  o.seed = run.cfg.experiment.seed;
  o.workers = run.cfg.experiment.workers;
  const EquilibriumSet set = enumerate_equilibria(ops, forcing, o);
  const AnalyticConstants c = analytic_constants(p, run.cfg.ell0(), forcing.beta);

  Json list = Json::array(), brief = Json::array();
  CsvTable table{{"index", "residual_norm", "h1_seminorm_sq", "lhs", "rhs", "passed"}, {}};
  bool all_passed = true;
  for (std::size_t i = 0; i < set.equilibria.size(); ++i) {
    const Equilibrium& eq = set.equilibria[i];
    const EquilibriumBound b = check_equilibrium_bound(eq, p, forcing, c);
    all_passed = all_passed && b.passed;
    list.push_back(to_json(eq, b, true));
    brief.push_back(to_json(eq, b, false));
    table.add({static_cast<double>(i), eq.residual_norm, eq.h1_seminorm_sq, b.lhs, b.rhs, b.passed ? 1.0 : 0.0});
  }
  run.csv("equilibria.csv", table);
  run.json("equilibria.json", Json{{"params", to_json(p)},
                                   {"forcing", forcing.name},
                                   {"grid", {{"n", g.n}, {"h", g.h}, {"L", g.L}}},
                                   {"equilibria", list}});
  run.summary = Json{{"attempts", set.attempts},
                     {"converged", set.converged},
                     {"distinct", set.equilibria.size()},
                     {"failures", set.failures},
                     {"equilibria", brief},
                     {"all_bounds_passed", all_passed},
                     {"constants", to_json(c)},
                     {"note", "multi-start enumeration is best-effort; completeness is not claimed"}};
  run.extra_manifest["newton_tol"] = o.newton.tol;
  run.extra_manifest["newton_max_iters"] = o.newton.max_iters;
}

void decay_cmd(Run& run) {
  if (!run.cfg.experiment.series.empty()) {
    std::vector<double> t, e;
    read_series_csv(run.cfg.experiment.series, t, e);
    run.summary = Json{{"source", run.cfg.experiment.series}, {"fit", to_json(fit_decay(t, e))}};
    return;
  }
  const Grid g = run.grid();
  const BeamParams p = run.params();
  const DiscreteOperators ops = assemble(p, g);
  const auto& x = run.cfg.experiment;
  const std::vector<State> ens = random_ensemble(ops, x.members > 0 ? x.members : 8, x.energy, x.seed);
  const std::vector<double> ells = run.ells({0.01, 0.1, 0.4});
  const AbsorptionReport r = absorbing_radius(p, run.cfg.forcing(), run.cfg.damping(), ells, ens, run.cfg.experiment.T,
                                              run.settings(), run.cfg.experiment.window);
  CsvTable table{{"ell", "member", "radius", "alpha", "gamma", "floor", "rmse"}, {}};
  for (const auto& e : r.entries) {
    for (std::size_t m = 0; m < e.fits.size(); ++m) {
      const DecayFit& f = e.fits[m];
      table.add({e.ell, static_cast<double>(m), e.member_radius[m], f.alpha, f.gamma, f.floor, f.rmse});
    }
  }
  run.csv("decay.csv", table);
  run.summary = to_json(r);
  run.summary["energy_shift"] = p.L * run.cfg.forcing().mF;
  run.extra_manifest["dt"] = run.stepper(ops).dt;
}

void singular_cmd(Run& run) {
  const Grid g = run.grid();
  const BeamParams p = run.params();
  const State initial =
      random_ensemble(assemble(at_ell(p, 0.0), g), 1, run.cfg.experiment.energy, run.cfg.experiment.seed).front();
  const std::vector<double> ells = run.ells({0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125});
  const SingularLimitReport r =
      singular_limit_experiment(p, run.cfg.forcing(), run.cfg.damping(), ells, initial, run.cfg.experiment.T, run.settings());
  CsvTable table{{"ell", "error", "w_sup"}, {}};
  for (const auto& row : r.rows) table.add({row.ell, row.error, row.w_sup});
  run.csv("singular_limit.csv", table);
  run.summary = to_json(r);
  run.summary["note"] = "convergence is guaranteed without a rate; rates are empirical";
  run.extra_manifest["dt"] = r.dt;
}

void semicontinuity_cmd(Run& run) {
  const auto& x = run.cfg.experiment;
  SamplingProtocol protocol;
  if (x.members > 0) protocol.members = x.members;
  protocol.energy = x.energy;
  protocol.pilot_T = x.pilot_T;
  protocol.transient = x.transient;
  protocol.harvest = x.harvest;
  protocol.stride = x.sample_stride;
  protocol.rel_tolerance = x.rel_tolerance;
  protocol.symmetrize = x.symmetrize;
  protocol.seed = x.seed;
  const std::vector<double> ells = run.ells({0.2, 0.1, 0.05});
  const SemicontinuityReport r = upper_semicontinuity_experiment(run.params(), run.cfg.forcing(), run.cfg.damping(), ells,
                                                                 run.cfg.grid.n, protocol, run.settings());
  CsvTable table{{"ell", "semidistance", "sample_size"}, {}};
  for (const auto& row : r.rows) table.add({row.ell, row.semidistance, static_cast<double>(row.sample_size)});
  run.csv("semicontinuity.csv", table);
  run.summary = to_json(r);
}

void quasistability_cmd(Run& run) {
  const Grid g = run.grid();
  const BeamParams p = run.params();
  const DiscreteOperators ops = assemble(p, g);
  const auto& x = run.cfg.experiment;
  const std::vector<State> base = random_ensemble(ops, x.pairs, x.energy, x.seed);
  const Vector mode = sine_mode(g, 1) / l2_norm(g, sine_mode(g, 1));
  std::vector<std::pair<State, State>> pairs;
  for (const State& s : base) {
    State other = s;
    other.phit += x.epsilon * mode;
    pairs.emplace_back(s, other);
  }
  const QuasistabilityReport r = quasistability_probe(p, run.cfg.forcing(), run.cfg.damping(), pairs, x.T, run.settings());
  CsvTable table{{"pair", "t", "energy", "compensator"}, {}};
  for (std::size_t k = 0; k < r.pairs.size(); ++k) {
    const PairProbe& pp = r.pairs[k];
    for (std::size_t i = 0; i < pp.t.size(); ++i) {
      table.add({static_cast<double>(k), pp.t[i], pp.energy[i], pp.compensator[i]});
    }
  }
  run.csv("quasistability.csv", table);
  run.summary = to_json(r);
  run.summary["p"] = run.cfg.forcing().p;
  if (!r.feasible) {
    run.failure = Failure{3, "numerical", {"quasi-stability inequality infeasible at some sample"}};
  }
  run.extra_manifest["dt"] = run.stepper(ops).dt;
}

void verify_cmd(Run& run) {
  SamplingSpec spec;
  spec.ell0 = run.cfg.ell0();
  const ValidationReport hyp = validate_hypotheses(run.params(), run.cfg.forcing(), run.cfg.damping(), spec);
  const ValidationReport disc = discretization_checks(run.params(), run.grid(), run.cfg.experiment.seed);
  CsvTable table{{"group", "name", "passed", "worst_value", "detail"}, {}};
  std::vector<std::string> failed;
  for (const auto& [group, report] : {std::pair{"hypotheses", &hyp}, std::pair{"discretization", &disc}}) {
    for (const auto& c : report->checks) {
      table.rows.push_back({group, c.name, c.passed ? "true" : "false", format_number(c.worst_value), c.detail});
      if (!c.passed) failed.push_back(std::string(group) + "." + c.name + ": " + c.detail);
    }
  }
  run.csv("checks.csv", table);
  run.summary = Json{{"hypotheses", to_json(hyp)}, {"discretization", to_json(disc)}, {"all_passed", failed.empty()}};
  if (!failed.empty()) run.failure = Failure{2, "hypothesis", failed};
}

Json manifest(const Run& run) {
  const RunConfig& c = run.cfg;
  Json m{{"program", "bresse_lab"},
         {"version", kVersion},
         {"experiment", c.experiment.name},
         {"config", to_json(c)},
         {"config_text", emit_config(c)},
         {"seeds",
          {{"base", c.experiment.seed},
           {"member_rule", "member i uses mt19937_64(base * 0x9E3779B97F4A7C15 + i)"}}},
         {"grid", {{"n", c.grid.n}, {"L", c.model.L}, {"h", c.model.L / (c.grid.n + 1)}}},
         {"tolerances",
          {{"newton_tol", c.stepper.newton_tol},
           {"newton_max_iters", c.stepper.newton_max_iters},
           {"rel_tolerance", c.experiment.rel_tolerance}}},
         {"workers", c.experiment.workers}};
  for (const auto& [k, v] : run.extra_manifest.items()) m[k] = v;
  std::vector<std::string> files = run.files;
  if (c.output.wants("json")) files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  m["outputs"] = files;
  return m;
}

int report_failure(const Failure& f, const std::optional<fs::path>& dir) {
  const Json j{{"error", {{"kind", f.kind}, {"messages", f.messages}}}, {"exit_code", f.code}};
  std::cerr << j.dump() << "\n";
  if (dir) {
    std::error_code ec;
    fs::create_directories(*dir, ec);
    if (!ec) {
      try {
        write_file((*dir / "error.json").string(), dump(j));
      } catch (const std::exception&) {
      }
    }
  }
  return f.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the damped Bresse arched beam and its Timoshenko limit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--output", output_dir, "output directory (overrides output.directory)");
  app.add_option("--workers", workers, "concurrent simulations (overrides experiment.workers)");
  app.add_option("--seed", seed, "random seed (overrides experiment.seed)");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "single trajectory with energy bookkeeping"},
      {"equilibria", "multi-start Newton enumeration of stationary states"},
      {"decay-fit", "ensemble absorbing radius and energy decay fits, or fit a CSV series"},
      {"singular-limit", "Bresse runs against the Timoshenko run as ell -> 0"},
      {"semicontinuity", "semidistance of sampled attractors as ell -> 0"},
      {"quasistability", "difference-energy probe for trajectory pairs"},
      {"verify", "hypothesis screen and discretization self-checks"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure({2, "usage", {e.what()}}, std::nullopt);
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  std::optional<fs::path> dir;
  if (output_dir) dir = fs::path(*output_dir);
  try {
    RunConfig cfg = load_config_file(config_path, experiment);
    if (output_dir) cfg.output.directory = *output_dir;
    if (workers) cfg.experiment.workers = *workers;
    if (seed) cfg.experiment.seed = *seed;
    dir = fs::path(cfg.output.directory);
    if (const auto errors = validate_config(cfg); !errors.empty()) throw ConfigErrors(errors);

    Run run(cfg);
    fs::create_directories(run.dir);
    if (experiment == "simulate") simulate_cmd(run);
    else if (experiment == "equilibria") equilibria_cmd(run);
    else if (experiment == "decay-fit") decay_cmd(run);
    else if (experiment == "singular-limit") singular_cmd(run);
    else if (experiment == "semicontinuity") semicontinuity_cmd(run);
    else if (experiment == "quasistability") quasistability_cmd(run);
    else verify_cmd(run);

    Json summary{{"experiment", experiment},
                 {"status", run.failure ? "failed" : "ok"},
                 {"params", to_json(run.params())},
                 {"forcing", run.cfg.forcing().name},
                 {"damping", run.cfg.damping().name},
                 {"results", run.summary}};
    run.json("summary.json", summary);
    run.json("manifest.json", manifest(run));
    if (run.failure) return report_failure(*run.failure, dir);
    std::cout << experiment << ": ok, outputs in " << run.dir.string() << "\n";
    return 0;
  } catch (const ConfigErrors& e) {
    return report_failure({2, "config", e.errors}, dir);
  } catch (const ConfigError& e) {
    return report_failure({2, "config", {e.what()}}, dir);
  } catch (const NumericalError& e) {
    return report_failure({3, "numerical", {e.what()}}, dir);
  } catch (const fs::filesystem_error& e) {
    return report_failure({2, "io", {e.what()}}, std::nullopt);
  } catch (const std::exception& e) {
    return report_failure({3, "internal", {e.what()}}, dir);
  }
}
