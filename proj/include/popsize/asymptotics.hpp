#pragma once

#include <vector>

#include "popsize/grid.hpp"
#include "popsize/optimizer.hpp"

namespace popsize {

/// Zero-mean solution of  L eta = -m0 (m - m0).  Throws GaugeViolation when
/// |mean(m) - m0| > 1e-10.
Field eta_hat_1(const Field& m, const ResourceBudget& budget);

/// beta_1 = dirichlet_energy(eta_hat_1) / m0^2.
double beta_1(const Field& m, const ResourceBudget& budget);

/// Gradient density of beta_1: (2/m0) eta_hat_1.
Field beta_1_gradient(const Field& m, const ResourceBudget& budget);

/// Large-mu expansion  theta = sum_k eta_k / mu^k,  eta_k = eta_hat_k + beta_k,
/// F_mu = sum_k beta_k / mu^k.
struct ExpansionCoefficients {
  /// eta_hat[0] is the zero field; eta_hat[k] is zero-mean.
  std::vector<Field> eta_hat;
  /// beta[0] = m0.
  std::vector<double> beta;
  int order = 0;

  /// sum_{k<=K} beta_k / mu^k.
  double population(double mu, int K) const;
  double population(double mu) const { return population(mu, order); }
  /// sum_{k<=K} (eta_hat_k + beta_k) / mu^k.
  Field partial_sum(double mu, int K) const;
};

/// Cascade solves up to order K (K >= 1).  Every Poisson right side must have
/// mean <= 1e-9 of its scale, otherwise GaugeViolation.
ExpansionCoefficients expansion_coefficients(const Field& m, const ResourceBudget& budget, int K = 4);

/// E_m(u) = 1/2 dirichlet_energy(u) - m0 mean(m u); u must have zero mean
/// (NonZeroMean otherwise).
double limit_energy(const Field& m, const Field& u, const ResourceBudget& budget);

/// F_1(m) = -2 E_m(eta_hat_1) / m0^2.  Also checks that it equals beta_1 and
/// throws Error if the two differ by more than 1e-10 relative.
double limit_functional(const Field& m, const ResourceBudget& budget);

/// beta_1 and its gradient, with the Poisson factorization cached per grid.
ObjectiveFn limit_objective(const Grid& grid, const ResourceBudget& budget);

/// Maximize F_1 = beta_1 over the admissible set on `grid` (1D or 2D box).
OptimizationResult maximize_limit_functional(const Grid& grid, const ResourceBudget& budget,
                                             const OptimizerConfig& cfg = {});

}  // namespace popsize
