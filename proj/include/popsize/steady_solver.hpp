#pragma once

#include <optional>
#include <vector>

#include "popsize/grid.hpp"

namespace popsize {

struct SteadyOptions {
  /// Infinity-norm residual target.  When the rounding floor of the discrete
  /// residual exceeds it (large mu/h^2), the floor is used instead.
  double tol = 1e-10;
  int max_newton_iters = 60;
  /// Extra full Newton steps after convergence, until the update reaches rounding level.
  bool polish = true;
  /// Restart with a ramp in mu when plain Newton fails.
  bool continuation = true;
  int max_continuation_steps = 200;
};

/// Positive steady state of  mu*L theta + theta*(m - theta) = 0.
struct SteadyState {
  Field theta;
  double mu = 1.0;
  double residual_inf = 0.0;
  int newton_iters = 0;
  /// Effective tolerance (configured tol or the residual rounding floor).
  double tolerance = 0.0;
  bool continuation_used = false;
  std::vector<double> residual_history;
};

/// Damped Newton on the discrete logistic-diffusive equation, started from
/// `init` (default: the constant mean(m)); falls back to continuation in mu.
SteadyState solve_steady_state(const Field& m, double mu, const std::optional<Field>& init = std::nullopt,
                               const SteadyOptions& options = {});

/// mu*L theta + theta*(m - theta).
Eigen::VectorXd steady_residual(const Field& m, double mu, const Eigen::VectorXd& theta);

/// F_mu(m) = mean(theta).
double total_population(const SteadyState& state);

/// | F - mean(m) - mu * mean(|grad theta|^2 / theta^2) |, with face-averaged theta.
double population_identity_check(const SteadyState& state, const Field& m);

/// Convenience: F_mu(m) from a fresh solve.
double population(const Field& m, double mu, const SteadyOptions& options = {});

}  // namespace popsize
