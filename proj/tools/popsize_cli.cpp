// popsize: command-line front end.
//
// Exit codes: 0 all checks passed, 1 a check failed, 2 usage or runtime error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "popsize/asymptotics.hpp"
#include "popsize/config.hpp"
#include "popsize/experiments.hpp"
#include "popsize/rearrangement.hpp"
#include "popsize/report.hpp"
#include "popsize/spectral.hpp"
#include "popsize/steady_solver.hpp"

namespace fs = std::filesystem;
using namespace popsize;

namespace {

constexpr const char* kOutputEnv = "POPSIZE_OUTPUT_DIR";

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  // Shorthand flags, applied as overrides before --set.
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override, e.g. solver.tol=1e-12 (repeatable)");
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + name, [&c, key](const std::string& v) { c.flags[key] = v; }, help);
  };
  flag("mu", "mu", "Diffusion rate");
  flag("m0", "budget.m0", "Mean resource");
  flag("kappa", "budget.kappa", "Resource cap");
  flag("dimension", "domain.dimension", "1 or 2");
  flag("cells", "domain.cells", "Cell counts, e.g. 1000 or [24,48]");
  flag("seed", "seed", "Random seed");
  flag("threads", "threads", "Worker threads (0 = hardware)");
  flag("output-dir", "output_dir", "Output root (default $" + std::string(kOutputEnv) + ")");
  flag("solver.tol", "solver.tol", "Newton residual tolerance");
  flag("solver.max-newton-iters", "solver.max_newton_iters", "Newton iteration cap");
  flag("opt.max-iters", "optimizer.max_iters", "Ascent iteration cap");
  flag("opt.pg-tol", "optimizer.pg_tol", "Projected-gradient stopping tolerance");
  flag("opt.starts", "optimizer.starts", "JSON list of start names");
  flag("opt.parallel", "optimizer.parallel", "Run starts concurrently");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
  for (const auto& [key, value] : c.flags) {
    if (key == "domain.cells" && value.find('[') == std::string::npos) {
      cfg.set(key + "=[" + value + ",0]");
    } else {
      cfg.set(key + "=" + value);
    }
  }
  for (const std::string& o : c.overrides) cfg.set(o);
  return cfg;
}

fs::path output_root(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return "popsize_out";
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

double require_mu(const RunConfig& cfg) {
  if (!cfg.mu) throw InvalidArgument("--mu is required");
  if (!(*cfg.mu > 0.0)) throw InvalidArgument("mu must be positive");
  return *cfg.mu;
}

// A field CSV path or a named shape on the configured grid.
Field load_resource(const std::string& spec, const RunConfig& cfg, double mu) {
  if (fs::exists(spec)) return read_field_csv(spec);
  const Grid g = cfg.domain.grid(mu);
  const ResourceBudget b = cfg.budget();
  if (spec == "constant") return Field::constant(g, b.m0);
  if (spec == "crenel_right") return crenel_right(g, b);
  if (spec == "crenel_left") return crenel_left(g, b);
  if (spec == "double_crenel") return double_crenel(g, b);
  if (spec == "random") return initial_field("random", g, b, cfg.seed);
  throw InvalidArgument("'" + spec + "' is neither a file nor one of constant, crenel_left, crenel_right, "
                        "double_crenel, random");
}

void write_csv(const fs::path& path, const Field& u) {
  write_field_csv(path.string(), u);
  std::cout << "wrote " << path.string() << "\n";
}

void write_trace(const fs::path& path, const OptimizationResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "iter,objective,pg_norm,step\n";
  for (const IterationRecord& h : r.history) out << h.iter << ',' << h.objective << ',' << h.pg_norm << ',' << h.step << '\n';
  std::cout << "wrote " << path.string() << "\n";
}

int cmd_solve(const RunConfig& cfg, const std::string& resource) {
  const double mu = require_mu(cfg);
  const Field m = load_resource(resource, cfg, mu);
  const SteadyState s = solve_steady_state(m, mu, std::nullopt, cfg.optimizer.solver);
  const fs::path dir = prepare_dir(output_root(cfg) / "solve");
  std::cout.precision(12);
  std::cout << "grid " << m.grid.describe() << "\n"
            << "F " << total_population(s) << "\n"
            << "residual_inf " << s.residual_inf << "\n"
            << "newton_iters " << s.newton_iters << "\n"
            << "identity_residual " << population_identity_check(s, m) << "\n";
  write_csv(dir / "theta.csv", s.theta);
  return 0;
}

int cmd_optimize(const RunConfig& cfg) {
  const double mu = require_mu(cfg);
  const Grid g = cfg.domain.grid(mu);
  const ResourceBudget b = cfg.budget();
  const OptimizationResult r = maximize(mu, g, b, cfg.optimizer);
  const CertificationReport c = certify(r, mu, b, {}, cfg.optimizer.solver);
  const fs::path dir = prepare_dir(output_root(cfg) / "optimize");
  std::cout.precision(12);
  std::cout << "grid " << g.describe() << "\n"
            << "objective " << r.objective << "\n"
            << "start " << r.start << "\n"
            << "converged " << r.converged << "\n"
            << "bang_bang_fraction " << r.bang_bang_fraction << "\n";
  for (const StartSummary& s : r.starts) {
    std::cout << "  start " << s.name << " objective " << s.objective << " iterations " << s.iterations
              << (s.error.empty() ? "" : " error: " + s.error) << "\n";
  }
  write_csv(dir / "m_star.csv", r.m_star);
  if (r.theta) write_csv(dir / "theta.csv", *r.theta);
  if (r.phi) write_csv(dir / "phi.csv", *r.phi);
  write_trace(dir / "trace.csv", r);
  std::ostringstream cert;
  cert.precision(12);
  cert << "level_c " << c.levels.level_c << "\n"
       << "epsilon " << c.levels.epsilon << "\n"
       << "violation_fraction " << c.levels.violation_fraction << "\n"
       << "bang_bang_fraction " << c.levels.bang_bang_fraction << "\n"
       << "saturated_measure " << c.levels.saturated_measure << "\n"
       << "switching_residual " << c.switching_residual << "\n"
       << "passed " << c.passed << "\n";
  for (const std::string& f : c.failures) cert << "failure " << f << "\n";
  std::ofstream(dir / "certification.txt") << cert.str();
  std::cout << cert.str();
  return c.passed ? 0 : 1;
}

int cmd_eigen(const RunConfig& cfg, const std::string& resource, bool optimize) {
  const double mu = require_mu(cfg);
  const fs::path dir = prepare_dir(output_root(cfg) / "eigen");
  std::cout.precision(15);
  if (optimize) {
    const OptimizationResult r = maximize_principal_eigenvalue(mu, cfg.domain.grid(mu), cfg.budget(), cfg.optimizer);
    std::cout << "lambda1_max " << r.objective << "\nstart " << r.start << "\n";
    write_csv(dir / "m_star.csv", r.m_star);
    write_trace(dir / "trace.csv", r);
    return 0;
  }
  const Field m = load_resource(resource, cfg, mu);
  const EigenPair e = principal_eigenvalue(m, mu);
  std::cout << "lambda1 " << e.lambda1 << "\n"
            << "residual " << e.residual << "\n"
            << "iterations " << e.iterations << "\n"
            << "gap_estimate " << e.gap_estimate << "\n";
  write_csv(dir / "eigenfunction.csv", e.eigenfunction);
  return 0;
}

int cmd_expand(const RunConfig& cfg, const std::string& resource, int order) {
  const double mu = cfg.mu.value_or(100.0);
  const Field m = load_resource(resource, cfg, mu);
  const ExpansionCoefficients ex = expansion_coefficients(m, cfg.budget(), order);
  const fs::path dir = prepare_dir(output_root(cfg) / "expand");
  std::cout.precision(15);
  for (int k = 0; k <= ex.order; ++k) std::cout << "beta_" << k << " " << ex.beta[k] << "\n";
  for (int k = 1; k <= ex.order; ++k) write_csv(dir / ("eta_hat_" + std::to_string(k) + ".csv"), ex.eta_hat[k]);
  if (cfg.mu) {
    const double f = population(m, mu, cfg.optimizer.solver);
    std::cout << "F " << f << "\n"
              << "partial_sum " << ex.population(mu) << "\n"
              << "remainder " << std::abs(f - ex.population(mu)) << "\n";
  }
  return 0;
}

int cmd_rearrange(const RunConfig& cfg, const std::string& resource, const std::string& plan_name,
                  const std::string& direction) {
  const Field u = load_resource(resource, cfg, cfg.mu.value_or(1.0));
  const Direction d = direction == "decreasing" ? Direction::DecreasingTowardRight : Direction::IncreasingTowardRight;
  const RearrangementPlan plan = plan_name == "yx" ? RearrangementPlan::yx(d)
                                 : plan_name == "xy" ? RearrangementPlan::xy(d)
                                                     : RearrangementPlan::along_x(d);
  const Field r = rearrange(u, plan);
  const auto [e_u, e_r] = polya_check(u, plan);
  const bool eq = equimeasurable(u, r);
  const bool polya = e_r <= e_u * (1.0 + 1e-12) + 1e-300;
  const bool idem = rearrange(r, plan).values == r.values;
  const fs::path dir = prepare_dir(output_root(cfg) / "rearrange");
  std::cout.precision(15);
  std::cout << "equimeasurable " << eq << "\n"
            << "dirichlet_energy " << e_u << "\n"
            << "dirichlet_energy_rearranged " << e_r << "\n"
            << "polya " << polya << "\n"
            << "idempotent " << idem << "\n";
  write_csv(dir / "rearranged.csv", r);
  return eq && polya && idem ? 0 : 1;
}

int cmd_experiment(RunConfig cfg, const std::string& name) {
  std::vector<std::string> names = name == "all" ? experiment_names() : std::vector<std::string>{name};
  std::vector<ExperimentReport> reports;
  for (const std::string& n : names) {
    cfg.experiment = n;
    std::cout << "running " << n << "\n" << std::flush;
    reports.push_back(run_experiment(n, cfg));
  }
  const fs::path dir = output_root(cfg) / ("experiment_" + name);
  emit_report(reports, dir.string());
  bool ok = true;
  for (const ExperimentReport& r : reports) {
    for (const CheckResult& c : r.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << r.name << "/" << c.name << (c.advisory ? " (advisory)" : "")
                << ": " << c.detail << "\n";
    }
    ok = ok && r.passed();
  }
  std::cout << "report written to " << dir.string() << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total population size of the steady logistic-diffusive equation"};
  app.require_subcommand(1);
  Common common;
  std::string resource = "crenel_right";
  bool eigen_opt = false;
  int order = 4;
  std::string plan = "x", direction = "increasing", experiment;

  auto* solve = app.add_subcommand("solve", "Steady state and total population of a resource field");
  add_common(solve, common);
  solve->add_option("--resource,-m", resource, "Field CSV or shape name");

  auto* optimize = app.add_subcommand("optimize", "Maximize the total population over the admissible set");
  add_common(optimize, common);

  auto* eigen = app.add_subcommand("eigen", "Principal eigenvalue, or its maximizer with --maximize");
  add_common(eigen, common);
  eigen->add_option("--resource,-m", resource, "Field CSV or shape name");
  eigen->add_flag("--maximize", eigen_opt, "Maximize lambda1 over the admissible set");

  auto* expand = app.add_subcommand("expand", "Large-mu expansion coefficients");
  add_common(expand, common);
  expand->add_option("--resource,-m", resource, "Field CSV or shape name");
  expand->add_option("--order,-K", order, "Expansion order")->check(CLI::Range(1, 12));

  auto* rearr = app.add_subcommand("rearrange", "Monotone rearrangement with equimeasurability and energy checks");
  add_common(rearr, common);
  rearr->add_option("--resource,-m", resource, "Field CSV or shape name");
  rearr->add_option("--plan", plan, "x, xy or yx")->check(CLI::IsMember({"x", "xy", "yx"}));
  rearr->add_option("--direction", direction, "increasing or decreasing")
      ->check(CLI::IsMember({"increasing", "decreasing"}));

  auto* exper = app.add_subcommand("experiment", "Run a named experiment and write its report");
  add_common(exper, common);
  std::vector<std::string> choices = experiment_names();
  choices.push_back("all");
  exper->add_option("name", experiment, "Experiment name")->required()->check(CLI::IsMember(choices));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig cfg = build_config(common);
    if (*solve) return cmd_solve(cfg, resource);
    if (*optimize) return cmd_optimize(cfg);
    if (*eigen) return cmd_eigen(cfg, resource, eigen_opt);
    if (*expand) return cmd_expand(cfg, resource, order);
    if (*rearr) return cmd_rearrange(cfg, resource, plan, direction);
    if (*exper) return cmd_experiment(cfg, experiment);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
