#pragma once

#include <optional>

#include "popsize/grid.hpp"
#include "popsize/linear_solve.hpp"
#include "popsize/steady_solver.hpp"

namespace popsize {

/// Factored linearization  J = mu*L + diag(m - 2 theta)  at a steady state.
/// Build one per (m, state) pair and share it between the adjoint, tangent and
/// second-order solves.
class Linearization {
 public:
  Linearization(const Field& m, const SteadyState& state);

  const Field& resource() const { return m_; }
  const Field& theta() const { return theta_; }
  double mu() const { return solver_.mu(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return solver_.apply(x); }
  /// Throws SingularAdjoint when the factorization broke down.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  static ShiftedLaplacianSolver factor(const Field& m, const SteadyState& state);

  Field m_;
  Field theta_;
  ShiftedLaplacianSolver solver_;
};

struct AdjointState {
  Field p;
  double mu = 1.0;
  /// ||mu*L p + (m - 2 theta) p - 1||_inf.
  double residual_inf = 0.0;
};

AdjointState solve_adjoint(const Field& m, const SteadyState& state);
AdjointState solve_adjoint(const Linearization& lin);

/// g = -theta*p, so that dF[h] = mean(h*g).
Field gradient_density(const SteadyState& state, const AdjointState& adjoint);

struct DirectionalDerivatives {
  double first = 0.0;   ///< dF[h] = mean(theta_dot)
  double second = 0.0;  ///< d2F[h,h] = mean(theta_ddot)
  Field theta_dot;
  Field theta_ddot;
};

DirectionalDerivatives directional_derivatives(const Field& m, const SteadyState& state, const Field& h);
DirectionalDerivatives directional_derivatives(const Linearization& lin, const Field& h);

/// Mixed second derivative d2F[h1,h2] from a direct solve of the bilinear
/// second-order system.
double second_derivative_bilinear(const Linearization& lin, const Field& h1, const Field& h2);

/// phi = theta*p and the level c separating {m = kappa} (phi < c) from {m = 0} (phi > c).
struct SwitchingFunction {
  Field phi;
  std::optional<double> level_c;
};

SwitchingFunction switching_function(const SteadyState& state, const AdjointState& adjoint);

/// The l-quantile of phi (l = m0/kappa): midpoint between the k-th and (k+1)-th
/// smallest values with k = round(l*N).
double estimate_switching_level(const Field& m, const Field& phi, const ResourceBudget& budget);

/// Cellwise comparison of m with the level-set structure of phi.
struct LevelSetReport {
  double level_c = 0.0;
  /// Band half-width: the largest jump of phi between neighbouring cells.
  double epsilon = 0.0;
  /// Fraction of cells where m and phi disagree: m = kappa with phi > c + eps,
  /// m = 0 with phi < c - eps, or m strictly between the bounds with |phi - c| > eps.
  double violation_fraction = 0.0;
  /// Fraction of cells with delta < m < kappa - delta.
  double intermediate_fraction = 0.0;
  /// Measure of {m = 0} union {m = kappa} relative to |Omega|.
  double saturated_measure = 0.0;
  double bang_bang_fraction = 0.0;
};

/// `delta` is the bound-saturation threshold (default 1e-6*kappa).
LevelSetReport level_set_report(const Field& m, const Field& phi, const ResourceBudget& budget,
                                std::optional<double> delta = std::nullopt);

/// Fraction of cells with m <= delta or m >= kappa - delta.
double bang_bang_fraction(const Field& m, const ResourceBudget& budget, std::optional<double> delta = std::nullopt);

/// Mean absolute residual of the second-order equation satisfied by phi:
///   mu*L phi - 2 mu <grad phi, grad theta / theta> + phi (2 mu |grad theta|^2/theta^2 + 2m - 3 theta) - theta.
/// Gradients are central differences with reflected ghosts.  Diagnostic only:
/// it tends to zero under refinement but is O(1) at cells where m jumps.
double switching_pde_residual(const Field& m, const SteadyState& state, const AdjointState& adjoint);

}  // namespace popsize
