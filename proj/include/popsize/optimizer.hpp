#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "popsize/grid.hpp"
#include "popsize/sensitivity.hpp"
#include "popsize/steady_solver.hpp"

namespace popsize {

struct OptimizerConfig {
  int max_iters = 5000;
  /// Sufficient-increase constant of the projected Armijo test.
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  /// Relative bisection width of the projection shift.
  double projection_tol = 1e-14;
  /// Stop once ||P(m + tau g) - m||_inf / tau <= pg_tol * ||g_0||_inf.
  double pg_tol = 1e-8;
  /// Named initializations: constant, crenel_left, crenel_right, double_crenel, random.
  std::vector<std::string> starts{"constant", "crenel_left", "crenel_right", "double_crenel", "random"};
  std::uint64_t seed = 20240917;
  /// After convergence, try monotone rearrangements of m_star and continue from
  /// any that improve the objective.
  bool rearrangement_polish = true;
  int max_polish_rounds = 4;
  /// Run the starts on separate threads.
  bool parallel = false;
  SteadyOptions solver;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double pg_norm = 0.0;
  double step = 0.0;
};

/// Objective value and gradient density g (dJ[h] = mean(h*g)) at a field.
struct Evaluation {
  double value = 0.0;
  Field gradient;
  /// Steady state when the objective has one; reused to warm-start the next solve.
  std::optional<SteadyState> state;
};

/// `warm` is the evaluation at the current iterate, or null on the first call.
using ObjectiveFn = std::function<Evaluation(const Field& m, const Evaluation* warm)>;

struct StartSummary {
  std::string name;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Empty on success; the error text for a start that threw.
  std::string error;
};

struct OptimizationResult {
  Field m_star;
  double objective = 0.0;
  std::string start;
  std::vector<IterationRecord> history;
  bool converged = false;
  double bang_bang_fraction = 0.0;
  LevelSetReport optimality;
  std::optional<Field> theta;
  std::optional<Field> phi;
  std::vector<StartSummary> starts;
};

/// Euclidean projection onto {0 <= m <= kappa, mean(m) = m0}: clip(m_raw + s, 0, kappa)
/// with the scalar shift s found by bisection and then solved exactly on the
/// final active set.
Field project_onto_admissible(const Field& m_raw, const ResourceBudget& budget, double tol = 1e-14);

/// Named starting field projected onto the admissible set.
Field initial_field(const std::string& name, const Grid& grid, const ResourceBudget& budget, std::uint64_t seed);

/// Monotone projected-gradient ascent of an arbitrary objective from one start.
OptimizationResult projected_gradient_ascent(const ObjectiveFn& objective, const Field& start,
                                             const ResourceBudget& budget, const OptimizerConfig& cfg);

/// Multi-start ascent; the best start wins.  A start that throws is recorded
/// in `starts` and skipped.
OptimizationResult maximize_objective(const ObjectiveFn& objective, const Grid& grid, const ResourceBudget& budget,
                                      const OptimizerConfig& cfg);

/// F_mu(m) with its adjoint gradient.
ObjectiveFn population_objective(double mu, const SteadyOptions& solver = {});

/// 1D default cell count max(64, round(1000/mu)), capped at 1e5.
int default_cells(double mu);

/// Maximize F_mu over the admissible set on `grid`; fills theta, phi and the
/// optimality report of the winner.
OptimizationResult maximize(double mu, const Grid& grid, const ResourceBudget& budget, const OptimizerConfig& cfg = {});

struct CertifyThresholds {
  double max_violation = 0.01;
  double min_bang_bang = 0.99;
};

struct CertificationReport {
  LevelSetReport levels;
  double switching_residual = 0.0;
  bool passed = false;
  std::vector<std::string> failures;
};

CertificationReport certify(const OptimizationResult& result, double mu, const ResourceBudget& budget,
                            const CertifyThresholds& thresholds = {}, const SteadyOptions& solver = {});

}  // namespace popsize
