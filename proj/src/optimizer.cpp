#include "popsize/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

#include "popsize/rearrangement.hpp"

namespace popsize {

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("optimizer: max_iters must be positive");
  if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidArgument("optimizer: armijo must lie in (0,1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("optimizer: backtrack must lie in (0,1)");
  if (max_backtracks < 1) throw InvalidArgument("optimizer: max_backtracks must be positive");
  if (!(projection_tol > 0.0)) throw InvalidArgument("optimizer: projection_tol must be positive");
  if (!(pg_tol > 0.0)) throw InvalidArgument("optimizer: pg_tol must be positive");
  if (starts.empty()) throw InvalidArgument("optimizer: no starts configured");
  if (!(solver.tol > 0.0)) throw InvalidArgument("optimizer: solver tolerance must be positive");
}

Field project_onto_admissible(const Field& m_raw, const ResourceBudget& budget, double tol) {
  if (!m_raw.all_finite()) throw InvalidArgument("project_onto_admissible: non-finite field");
  const double m0 = budget.m0;
  const double kappa = budget.kappa;
  if (!(m0 > 0.0 && m0 < kappa)) throw InfeasibleBudget("project_onto_admissible: need 0 < m0 < kappa");
  const Eigen::ArrayXd x = m_raw.values.array();
  if (x.minCoeff() >= 0.0 && x.maxCoeff() <= kappa && std::abs(x.mean() - m0) <= 1e-15 * kappa) return m_raw;

  auto avg = [&](double s) { return (x + s).max(0.0).min(kappa).mean(); };
  double lo = -x.maxCoeff();
  double hi = kappa - x.minCoeff();
  const double width = tol * std::max(1.0, hi - lo);
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    const double s = 0.5 * (lo + hi);
    if (s <= lo || s >= hi) break;
    if (avg(s) < m0) lo = s; else hi = s;
  }
  double s = 0.5 * (lo + hi);

  // Solve for s exactly on the active set found by bisection.
  const Eigen::ArrayXd y = x + s;
  const auto n = double(x.size());
  double fixed = 0.0, free_sum = 0.0;
  long free_count = 0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (y[k] >= kappa) fixed += kappa;
    else if (y[k] > 0.0) { free_sum += x[k]; ++free_count; }
  }
  if (free_count > 0) {
    const double exact = (m0 * n - fixed - free_sum) / double(free_count);
    if (std::abs(exact - s) <= 10.0 * width + 1e-12 * kappa) s = exact;
  }
  return m_raw.with((x + s).max(0.0).min(kappa).matrix());
}

Field initial_field(const std::string& name, const Grid& grid, const ResourceBudget& budget, std::uint64_t seed) {
  if (name == "constant") {
    // An exactly constant m is a critical point; tilt it slightly.
    const double amp = 0.1 * std::min(budget.m0, budget.kappa - budget.m0);
    const double a1 = grid.extent(0);
    Eigen::VectorXd v(grid.size());
    const int ny = grid.dimension() == 1 ? 1 : grid.cells(1);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < grid.cells(0); ++i) {
        double t = std::cos(std::numbers::pi * grid.center(0, i) / a1);
        if (grid.dimension() == 2) t += 0.5 * std::cos(std::numbers::pi * grid.center(1, j) / grid.extent(1));
        v[grid.index(i, j)] = budget.m0 + amp * t;
      }
    }
    return project_onto_admissible(Field(grid, std::move(v)), budget);
  }
  if (name == "crenel_left") return project_onto_admissible(crenel_left(grid, budget), budget);
  if (name == "crenel_right") return project_onto_admissible(crenel_right(grid, budget), budget);
  if (name == "double_crenel") return project_onto_admissible(double_crenel(grid, budget), budget);
  if (name == "random") {
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> idx(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) idx[k] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto count = std::lround(budget.crenel_length() * double(grid.size()));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.size());
    for (long k = 0; k < count; ++k) v[idx[k]] = budget.kappa;
    return project_onto_admissible(Field(grid, std::move(v)), budget);
  }
  throw InvalidArgument("unknown optimizer start '" + name + "'");
}

namespace {

double centered_sup(const Eigen::VectorXd& g) { return (g.array() - g.mean()).abs().maxCoeff(); }

struct AscentRun {
  Field m;
  Evaluation eval;
  std::vector<IterationRecord> history;
  bool converged = false;
};

// Monotone projected gradient ascent with Barzilai-Borwein trial steps.
void ascend(const ObjectiveFn& objective, AscentRun& run, const ResourceBudget& budget, const OptimizerConfig& cfg,
            double g_scale, int& iter) {
  const Grid& grid = run.m.grid;
  const double tau = budget.kappa / g_scale;
  auto pg_norm = [&](const Field& m, const Field& g) {
    const Field moved = project_onto_admissible(m.with(m.values + tau * g.values), budget, cfg.projection_tol);
    return (moved.values - m.values).cwiseAbs().maxCoeff() / tau;
  };

  double step = tau;
  run.converged = false;
  for (; iter < cfg.max_iters; ++iter) {
    const double pg = pg_norm(run.m, run.eval.gradient);
    run.history.push_back({iter, run.eval.value, pg, step});
    if (pg <= cfg.pg_tol * g_scale) {
      run.converged = true;
      return;
    }

    bool accepted = false;
    double t = step;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt, t *= cfg.backtrack) {
      Field trial = project_onto_admissible(run.m.with(run.m.values + t * run.eval.gradient.values), budget,
                                            cfg.projection_tol);
      const Eigen::VectorXd d = trial.values - run.m.values;
      if (d.cwiseAbs().maxCoeff() == 0.0) break;
      const double predicted = mean(grid, run.eval.gradient.values.cwiseProduct(d));
      Evaluation e = objective(trial, &run.eval);
      if (e.value >= run.eval.value + cfg.armijo * predicted && e.value >= run.eval.value) {
        const Eigen::VectorXd y = e.gradient.values - run.eval.gradient.values;
        const double sy = mean(grid, d.cwiseProduct(y));
        const double ss = mean(grid, d.cwiseProduct(d));
        step = sy < 0.0 ? ss / -sy : 1e3 * tau;
        step = std::clamp(step, 1e-8 * tau, 1e6 * tau);
        run.m = std::move(trial);
        run.eval = std::move(e);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent direction left at working precision.
      ++iter;
      run.converged = pg <= 1e-6 * g_scale;
      return;
    }
  }
}

std::vector<RearrangementPlan> polish_plans(const Grid& grid) {
  const Direction up = Direction::IncreasingTowardRight;
  const Direction down = Direction::DecreasingTowardRight;
  if (grid.dimension() == 1) return {RearrangementPlan::along_x(up), RearrangementPlan::along_x(down)};
  std::vector<RearrangementPlan> plans;
  for (Direction dx : {up, down}) {
    for (Direction dy : {up, down}) {
      plans.push_back({{0, 1}, {dx, dy}});
      plans.push_back({{1, 0}, {dy, dx}});
    }
  }
  return plans;
}

}  // namespace

OptimizationResult projected_gradient_ascent(const ObjectiveFn& objective, const Field& start,
                                             const ResourceBudget& budget, const OptimizerConfig& cfg) {
  cfg.validate();
  Field m = project_onto_admissible(start, budget, cfg.projection_tol);
  Evaluation first = objective(m, nullptr);
  double g_scale = centered_sup(first.gradient.values);
  if (!(g_scale > 0.0)) g_scale = std::max(first.gradient.values.cwiseAbs().maxCoeff(), 1e-300);
  AscentRun run{std::move(m), std::move(first), {}, false};

  int iter = 0;
  ascend(objective, run, budget, cfg, g_scale, iter);
  if (cfg.rearrangement_polish) {
    for (int round = 0; round < cfg.max_polish_rounds && iter < cfg.max_iters; ++round) {
      std::optional<Field> best;
      std::optional<Evaluation> best_eval;
      for (const auto& plan : polish_plans(run.m.grid)) {
        Field cand = rearrange(run.m, plan);
        if (cand.values == run.m.values) continue;
        Evaluation e = objective(cand, &run.eval);
        const double bar = best_eval ? best_eval->value : run.eval.value;
        if (e.value > bar + 1e-12 * std::abs(bar)) {
          best = std::move(cand);
          best_eval = std::move(e);
        }
      }
      if (!best) break;
      run.m = std::move(*best);
      run.eval = std::move(*best_eval);
      ascend(objective, run, budget, cfg, g_scale, iter);
    }
  }

  OptimizationResult out{run.m, run.eval.value, {}, std::move(run.history), run.converged,
                         bang_bang_fraction(run.m, budget), {}, std::nullopt, std::nullopt, {}};
  if (run.eval.state) out.theta = run.eval.state->theta;
  return out;
}

OptimizationResult maximize_objective(const ObjectiveFn& objective, const Grid& grid, const ResourceBudget& budget,
                                      const OptimizerConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.starts.size();
  std::vector<std::optional<OptimizationResult>> results(n);
  std::vector<StartSummary> summaries(n);

  auto run_one = [&](std::size_t k) {
    summaries[k].name = cfg.starts[k];
    try {
      const Field start = initial_field(cfg.starts[k], grid, budget, cfg.seed + k);
      OptimizationResult r = projected_gradient_ascent(objective, start, budget, cfg);
      summaries[k].objective = r.objective;
      summaries[k].iterations = r.history.empty() ? 0 : r.history.back().iter;
      summaries[k].converged = r.converged;
      r.start = cfg.starts[k];
      results[k] = std::move(r);
    } catch (const Error& e) {
      summaries[k].error = e.what();
    }
  };

  if (cfg.parallel && n > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t k = 0; k < n; ++k) jobs.push_back(std::async(std::launch::async, run_one, k));
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t k = 0; k < n; ++k) run_one(k);
  }

  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < n; ++k) {
    if (results[k] && (!best || results[k]->objective > results[*best]->objective)) best = k;
  }
  if (!best) {
    std::string msg = "optimizer: every start failed";
    for (const auto& s : summaries) msg += "; " + s.name + ": " + s.error;
    throw NoConvergence(msg, std::numeric_limits<double>::quiet_NaN());
  }
  OptimizationResult out = std::move(*results[*best]);
  out.starts = std::move(summaries);
  return out;
}

ObjectiveFn population_objective(double mu, const SteadyOptions& solver) {
  return [mu, solver](const Field& m, const Evaluation* warm) {
    std::optional<Field> init;
    if (warm && warm->state) init = warm->state->theta;
    SteadyState st = solve_steady_state(m, mu, init, solver);
    const Linearization lin(m, st);
    const AdjointState adj = solve_adjoint(lin);
    Field g = gradient_density(st, adj);
    const double value = total_population(st);
    return Evaluation{value, std::move(g), std::move(st)};
  };
}

int default_cells(double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("default_cells: mu must be positive");
  const double n = std::round(1000.0 / mu);
  return int(std::clamp(n, 64.0, 1e5));
}

OptimizationResult maximize(double mu, const Grid& grid, const ResourceBudget& budget, const OptimizerConfig& cfg) {
  OptimizationResult r = maximize_objective(population_objective(mu, cfg.solver), grid, budget, cfg);
  const SteadyState st = solve_steady_state(r.m_star, mu, r.theta, cfg.solver);
  const AdjointState adj = solve_adjoint(r.m_star, st);
  const SwitchingFunction sw = switching_function(st, adj);
  r.theta = st.theta;
  r.phi = sw.phi;
  r.optimality = level_set_report(r.m_star, sw.phi, budget);
  return r;
}

CertificationReport certify(const OptimizationResult& result, double mu, const ResourceBudget& budget,
                            const CertifyThresholds& thresholds, const SteadyOptions& solver) {
  const Field& m = result.m_star;
  const SteadyState st = solve_steady_state(m, mu, result.theta, solver);
  const AdjointState adj = solve_adjoint(m, st);
  const SwitchingFunction sw = switching_function(st, adj);

  CertificationReport rep;
  rep.levels = level_set_report(m, sw.phi, budget);
  rep.switching_residual = switching_pde_residual(m, st, adj);
  if (rep.levels.violation_fraction > thresholds.max_violation) {
    rep.failures.push_back("level-set violation fraction " + std::to_string(rep.levels.violation_fraction) +
                           " exceeds " + std::to_string(thresholds.max_violation));
  }
  if (rep.levels.bang_bang_fraction < thresholds.min_bang_bang) {
    rep.failures.push_back("bang-bang fraction " + std::to_string(rep.levels.bang_bang_fraction) + " below " +
                           std::to_string(thresholds.min_bang_bang));
  }
  if (!(rep.levels.saturated_measure > 0.0)) rep.failures.push_back("{m = 0} and {m = kappa} are both empty");
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace popsize
