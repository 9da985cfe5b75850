#include "popsize/steady_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "popsize/linear_solve.hpp"
#include "popsize/spectral.hpp"

namespace popsize {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double laplacian_scale(const Grid& grid, double mu) {
  double s = 0.0;
  for (int a = 0; a < grid.dimension(); ++a) s += 2.0 / (grid.spacing(a) * grid.spacing(a));
  return mu * s;
}

// Rounding floor of the residual evaluation in the infinity norm.
double residual_floor(const Grid& grid, double mu, double m_max, double theta_max) {
  return 16.0 * kEps * theta_max * (2.0 * laplacian_scale(grid, mu) + m_max + theta_max);
}

struct NewtonOutcome {
  bool converged = false;
  bool collapsed = false;
  Eigen::VectorXd theta;
  double residual = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  int iters = 0;
  std::vector<double> history;
};

NewtonOutcome newton(const Field& m, double mu, Eigen::VectorXd theta, const SteadyOptions& opt) {
  NewtonOutcome out;
  const Grid& grid = m.grid;
  const double m_max = m.values.maxCoeff();
  Eigen::VectorXd r = steady_residual(m, mu, theta);

  auto tolerance = [&](const Eigen::VectorXd& t) {
    return std::max(opt.tol, residual_floor(grid, mu, m_max, t.cwiseAbs().maxCoeff()));
  };

  for (int it = 0;; ++it) {
    const double rinf = r.cwiseAbs().maxCoeff();
    out.history.push_back(rinf);
    if (!std::isfinite(rinf)) break;
    if (rinf <= tolerance(theta)) {
      out.converged = true;
      break;
    }
    if (it == opt.max_newton_iters) break;
    if (theta.maxCoeff() < 1e-8 * std::max(m_max, 1e-300)) {
      out.collapsed = true;
      break;
    }

    Eigen::VectorXd step;
    try {
      ShiftedLaplacianSolver jac(grid, mu, (m.values - 2.0 * theta));
      step = jac.solve(-r);
    } catch (const Error&) {
      break;
    }

    // Positivity-preserving cap on the step length, then backtrack on ||r||_2.
    double alpha = 1.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      if (step[k] < 0.0) alpha = std::min(alpha, 0.9 * theta[k] / -step[k]);
    }
    const double r2 = r.norm();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      Eigen::VectorXd trial = theta + alpha * step;
      Eigen::VectorXd rt = steady_residual(m, mu, trial);
      if (rt.allFinite() && rt.norm() <= (1.0 - 1e-4 * alpha) * r2) {
        theta = std::move(trial);
        r = std::move(rt);
        accepted = true;
        break;
      }
    }
    ++out.iters;
    if (!accepted) break;
  }

  // Polish: full Newton steps until the update is at rounding level.  The
  // residual alone is a poor stop signal when mu/h^2 is large, since its floor
  // sits well above the attainable accuracy of smooth error modes.
  if (out.converged && opt.polish) {
    double last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd step;
      try {
        ShiftedLaplacianSolver jac(grid, mu, (m.values - 2.0 * theta));
        step = jac.solve(-r);
      } catch (const Error&) {
        break;
      }
      const double size = step.cwiseAbs().maxCoeff();
      if (!(size < 0.5 * last)) break;
      Eigen::VectorXd trial = theta + step;
      Eigen::VectorXd rt = steady_residual(m, mu, trial);
      if (!(trial.array() > 0.0).all() || !rt.allFinite() || rt.cwiseAbs().maxCoeff() > tolerance(trial)) break;
      theta = std::move(trial);
      r = std::move(rt);
      out.history.push_back(r.cwiseAbs().maxCoeff());
      last = size;
      if (size <= 4.0 * kEps * theta.cwiseAbs().maxCoeff()) break;
    }
  }

  out.residual = r.cwiseAbs().maxCoeff();
  out.tolerance = tolerance(theta);
  if (out.converged && (theta.array() <= 0.0).any()) out.converged = false;
  out.theta = std::move(theta);
  return out;
}

SteadyState make_state(const Field& m, double mu, NewtonOutcome&& o, bool continued) {
  SteadyState s{Field(m.grid, std::move(o.theta)), mu, o.residual, o.iters, o.tolerance, continued,
                std::move(o.history)};
  return s;
}

[[noreturn]] void report_collapse(const Field& m, double mu) {
  const double lambda = principal_eigenvalue(m, mu).lambda1;
  std::ostringstream os;
  os << "steady state collapsed toward zero; lambda1(m, mu) = " << lambda;
  if (lambda <= 0.0) throw ExtinctionDetected(os.str(), lambda);
  throw NoConvergence(os.str() + " (positive, so a positive state exists)", 0.0);
}

}  // namespace

Eigen::VectorXd steady_residual(const Field& m, double mu, const Eigen::VectorXd& theta) {
  return mu * apply_neumann_laplacian(m.grid, theta) +
         theta.cwiseProduct(m.values - theta);
}

SteadyState solve_steady_state(const Field& m, double mu, const std::optional<Field>& init,
                               const SteadyOptions& options) {
  if (!m.all_finite()) throw NonPositiveResource("resource field has non-finite values");
  if (m.values.minCoeff() < 0.0) throw NonPositiveResource("resource field has negative values");
  const double m_mean = mean(m);
  if (!(m_mean > 0.0)) throw NonPositiveResource("resource field must have positive mean");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("diffusivity mu must be positive");
  if (!(options.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");

  Eigen::VectorXd start;
  if (init) {
    require_same_grid(m, *init, "solve_steady_state");
    start = init->values;
    if (!start.allFinite() || (start.array() <= 0.0).any()) {
      start = Eigen::VectorXd::Constant(m.size(), m_mean);
    }
  } else {
    start = Eigen::VectorXd::Constant(m.size(), m_mean);
  }

  NewtonOutcome direct = newton(m, mu, start, options);
  if (direct.converged) return make_state(m, mu, std::move(direct), false);
  if (!options.continuation) {
    if (direct.collapsed) report_collapse(m, mu);
    throw NoConvergence("Newton iteration did not converge", direct.residual);
  }

  // Continuation: start at a large mu, where the constant guess is close, and
  // walk mu down geometrically, shrinking the stride whenever a stage fails.
  double mu_now = std::max(10.0 * mu, 10.0);
  NewtonOutcome stage = newton(m, mu_now, Eigen::VectorXd::Constant(m.size(), m_mean), options);
  if (!stage.converged) {
    mu_now = 1e3 * std::max(mu, 1.0);
    stage = newton(m, mu_now, Eigen::VectorXd::Constant(m.size(), m_mean), options);
  }
  if (!stage.converged) throw NoConvergence("continuation could not start", stage.residual);

  int total = stage.iters;
  double stride = 2.0;
  for (int k = 0; k < options.max_continuation_steps; ++k) {
    const double next = std::max(mu, mu_now / stride);
    NewtonOutcome trial = newton(m, next, stage.theta, options);
    total += trial.iters;
    if (trial.converged) {
      mu_now = next;
      stage = std::move(trial);
      stride = std::min(stride * 1.5, 4.0);
      if (mu_now == mu) {
        stage.iters = total;
        return make_state(m, mu, std::move(stage), true);
      }
    } else {
      if (trial.collapsed && next == mu) report_collapse(m, mu);
      stride = std::sqrt(stride);
      if (stride < 1.0 + 1e-6) break;
    }
  }
  if (direct.collapsed) report_collapse(m, mu);
  throw NoConvergence("continuation in mu failed to reach the target diffusivity", stage.residual);
}

double total_population(const SteadyState& state) { return mean(state.theta); }

double population_identity_check(const SteadyState& state, const Field& m) {
  require_same_grid(m, state.theta, "population_identity_check");
  const double f = total_population(state);
  return std::abs(f - mean(m) - state.mu * weighted_dirichlet_energy(state.theta, state.theta));
}

double population(const Field& m, double mu, const SteadyOptions& options) {
  return total_population(solve_steady_state(m, mu, std::nullopt, options));
}

}  // namespace popsize
