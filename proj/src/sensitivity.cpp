#include "popsize/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace popsize {

ShiftedLaplacianSolver Linearization::factor(const Field& m, const SteadyState& state) {
  require_same_grid(m, state.theta, "linearization");
  try {
    return ShiftedLaplacianSolver(m.grid, state.mu, m.values - 2.0 * state.theta.values);
  } catch (const SingularSystem& e) {
    throw SingularAdjoint(e.what(), e.smallest_pivot());
  }
}

Linearization::Linearization(const Field& m, const SteadyState& state)
    : m_(m), theta_(state.theta), solver_(factor(m, state)) {}

Eigen::VectorXd Linearization::solve(const Eigen::VectorXd& rhs) const {
  try {
    return solver_.solve(rhs);
  } catch (const SingularSystem& e) {
    throw SingularAdjoint(e.what(), e.smallest_pivot());
  }
}

AdjointState solve_adjoint(const Field& m, const SteadyState& state) {
  return solve_adjoint(Linearization(m, state));
}

AdjointState solve_adjoint(const Linearization& lin) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(lin.theta().size());
  Eigen::VectorXd p = lin.solve(ones);
  const double res = (lin.apply(p) - ones).cwiseAbs().maxCoeff();
  return AdjointState{lin.theta().with(std::move(p)), lin.mu(), res};
}

Field gradient_density(const SteadyState& state, const AdjointState& adjoint) {
  require_same_grid(state.theta, adjoint.p, "gradient_density");
  return state.theta.with(-state.theta.values.cwiseProduct(adjoint.p.values));
}

DirectionalDerivatives directional_derivatives(const Field& m, const SteadyState& state, const Field& h) {
  return directional_derivatives(Linearization(m, state), h);
}

DirectionalDerivatives directional_derivatives(const Linearization& lin, const Field& h) {
  require_same_grid(lin.theta(), h, "directional_derivatives");
  if (!h.all_finite()) throw InvalidArgument("directional_derivatives: non-finite direction");
  const Eigen::VectorXd& theta = lin.theta().values;
  Eigen::VectorXd td = lin.solve(-h.values.cwiseProduct(theta));
  Eigen::VectorXd tdd = lin.solve(-2.0 * (h.values.cwiseProduct(td) - td.cwiseProduct(td)));
  const Grid& g = h.grid;
  DirectionalDerivatives out{mean(g, td), mean(g, tdd), h.with(std::move(td)), h.with(std::move(tdd))};
  return out;
}

double second_derivative_bilinear(const Linearization& lin, const Field& h1, const Field& h2) {
  require_same_grid(h1, h2, "second_derivative_bilinear");
  require_same_grid(lin.theta(), h1, "second_derivative_bilinear");
  const Eigen::VectorXd& theta = lin.theta().values;
  const Eigen::VectorXd t1 = lin.solve(-h1.values.cwiseProduct(theta));
  const Eigen::VectorXd t2 = lin.solve(-h2.values.cwiseProduct(theta));
  const Eigen::VectorXd rhs =
      -(h1.values.cwiseProduct(t2) + h2.values.cwiseProduct(t1) - 2.0 * t1.cwiseProduct(t2));
  return mean(h1.grid, lin.solve(rhs));
}

SwitchingFunction switching_function(const SteadyState& state, const AdjointState& adjoint) {
  require_same_grid(state.theta, adjoint.p, "switching_function");
  return {state.theta.with(state.theta.values.cwiseProduct(adjoint.p.values)), std::nullopt};
}

double estimate_switching_level(const Field& m, const Field& phi, const ResourceBudget& budget) {
  require_same_grid(m, phi, "estimate_switching_level");
  std::vector<double> v(phi.values.data(), phi.values.data() + phi.size());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<long>(v.size());
  const long k = std::clamp(std::lround(budget.crenel_length() * double(n)), 1L, n - 1);
  return 0.5 * (v[k - 1] + v[k]);
}

namespace {

double neighbour_variation(const Field& u) {
  const Grid& g = u.grid;
  const int nx = g.cells(0);
  const int ny = g.dimension() == 1 ? 1 : g.cells(1);
  double eps = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto k = g.index(i, j);
      if (i + 1 < nx) eps = std::max(eps, std::abs(u[k + 1] - u[k]));
      if (j + 1 < ny) eps = std::max(eps, std::abs(u[k + nx] - u[k]));
    }
  }
  return eps;
}

// Central difference along an axis with reflected ghosts (zero at the walls).
Eigen::VectorXd central_gradient(const Grid& g, const Eigen::VectorXd& u, int axis) {
  const int nx = g.cells(0);
  const int ny = g.dimension() == 1 ? 1 : g.cells(1);
  const double h2 = 2.0 * g.spacing(axis);
  Eigen::VectorXd d(u.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto k = g.index(i, j);
      double lo = u[k], hi = u[k];
      if (axis == 0) {
        if (i > 0) lo = u[k - 1];
        if (i + 1 < nx) hi = u[k + 1];
      } else {
        if (j > 0) lo = u[k - nx];
        if (j + 1 < ny) hi = u[k + nx];
      }
      d[k] = (hi - lo) / h2;
    }
  }
  return d;
}

}  // namespace

double bang_bang_fraction(const Field& m, const ResourceBudget& budget, std::optional<double> delta) {
  const double d = delta.value_or(1e-6 * budget.kappa);
  const auto hits = (m.values.array() <= d || m.values.array() >= budget.kappa - d).count();
  return double(hits) / double(m.size());
}

LevelSetReport level_set_report(const Field& m, const Field& phi, const ResourceBudget& budget,
                                std::optional<double> delta) {
  require_same_grid(m, phi, "level_set_report");
  const double d = delta.value_or(1e-6 * budget.kappa);
  LevelSetReport r;
  r.level_c = estimate_switching_level(m, phi, budget);
  r.epsilon = std::max(neighbour_variation(phi), 1e-12 * std::max(1.0, phi.values.cwiseAbs().maxCoeff()));
  long bad = 0, mid = 0, sat = 0;
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const double v = m[k];
    const double f = phi[k];
    if (v >= budget.kappa - d) {
      ++sat;
      if (f > r.level_c + r.epsilon) ++bad;
    } else if (v <= d) {
      ++sat;
      if (f < r.level_c - r.epsilon) ++bad;
    } else {
      ++mid;
      if (std::abs(f - r.level_c) > r.epsilon) ++bad;
    }
  }
  const double n = double(m.size());
  r.violation_fraction = bad / n;
  r.intermediate_fraction = mid / n;
  r.saturated_measure = sat / n;
  r.bang_bang_fraction = sat / n;
  return r;
}

double switching_pde_residual(const Field& m, const SteadyState& state, const AdjointState& adjoint) {
  require_same_grid(m, state.theta, "switching_pde_residual");
  const Grid& g = m.grid;
  const double mu = state.mu;
  const Eigen::VectorXd& th = state.theta.values;
  const Eigen::VectorXd phi = th.cwiseProduct(adjoint.p.values);

  Eigen::VectorXd r = mu * apply_neumann_laplacian(g, phi) - th;
  Eigen::VectorXd grad2 = Eigen::VectorXd::Zero(th.size());
  for (int a = 0; a < g.dimension(); ++a) {
    const Eigen::VectorXd dphi = central_gradient(g, phi, a);
    const Eigen::VectorXd dlog = central_gradient(g, th, a).cwiseQuotient(th);
    r -= 2.0 * mu * dphi.cwiseProduct(dlog);
    grad2 += dlog.cwiseProduct(dlog);
  }
  r += phi.cwiseProduct(2.0 * mu * grad2 + 2.0 * m.values - 3.0 * th);
  return r.cwiseAbs().mean();
}

}  // namespace popsize
