#pragma once

#include <optional>
#include <vector>

#include "popsize/grid.hpp"
#include "popsize/optimizer.hpp"

namespace popsize {

struct EigenOptions {
  int max_iters = 20000;
  /// Relative change of the eigenvalue estimate that ends the iteration.
  double tol = 1e-14;
};

/// Top eigenpair of  f -> mu*L f + m f.  The eigenfunction is positive and
/// normalized so that the integral of f^2 over the domain is 1.
struct EigenPair {
  double lambda1 = 0.0;
  Field eigenfunction;
  int iterations = 0;
  /// L2 norm of (mu*L + m - lambda1) f.
  double residual = 0.0;
  /// Estimate of lambda1 - lambda2 from the convergence rate; NaN when unavailable.
  double gap_estimate = 0.0;
  bool degenerate_gap = false;
};

/// Shifted inverse power iteration (shift ||m||_inf + 1) followed by a few
/// steps with the shift moved next to the converging estimate.
EigenPair principal_eigenvalue(const Field& m, double mu, const EigenOptions& options = {});

/// (-mu * int |grad f|^2 + int m f^2) / int f^2.
double rayleigh_quotient(const Field& m, double mu, const Field& f);

/// lambda1(m, mu) with gradient density |Omega| f^2 (f the normalized eigenfunction).
ObjectiveFn eigenvalue_objective(double mu, const EigenOptions& options = {});

OptimizationResult maximize_principal_eigenvalue(double mu, const Grid& grid, const ResourceBudget& budget,
                                                 const OptimizerConfig& cfg = {});

struct EigenPopulationRow {
  double mu = 0.0;
  int cells = 0;
  double lambda_best = 0.0;
  double population_best = 0.0;
  /// L1 distance between the two maximizers, minimized over reflection x -> 1 - x.
  double l1_distance = 0.0;
  bool differs = false;
  /// Cell width exceeds half the boundary-layer width sqrt(mu/kappa), or N < 16.
  bool under_resolved = false;
  std::optional<Field> eigen_maximizer;
  std::optional<Field> population_maximizer;
};

struct EigenComparisonReport {
  std::vector<EigenPopulationRow> rows;
  /// Distances above this count as different maximizers (0.2 m0).
  double threshold = 0.0;
  bool any_differs = false;
  bool any_under_resolved = false;
};

/// For each mu, maximizes lambda1 and F_mu over the admissible set on (0,1)
/// and compares the maximizers.  `cells` defaults to default_cells(mu).
EigenComparisonReport compare_eigen_vs_population(const ResourceBudget& budget, const std::vector<double>& mu_grid,
                                                  const OptimizerConfig& cfg = {},
                                                  std::optional<int> cells = std::nullopt);

}  // namespace popsize
