#include "popsize/asymptotics.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "popsize/linear_solve.hpp"

namespace popsize {

namespace {

constexpr double kMeanTol = 1e-10;
constexpr double kCompatTol = 1e-9;

void require_budget_mean(const Field& m, const ResourceBudget& budget) {
  const double gap = std::abs(mean(m) - budget.m0);
  if (gap > kMeanTol) {
    std::ostringstream os;
    os << "mean(m) differs from m0 by " << gap;
    throw GaugeViolation(os.str());
  }
}

Eigen::VectorXd solve_eta_hat_1(const NeumannPoissonSolver& poisson, const Field& m, double m0) {
  return poisson.solve(-m0 * (m.values.array() - m0).matrix(), kCompatTol);
}

}  // namespace

Field eta_hat_1(const Field& m, const ResourceBudget& budget) {
  require_budget_mean(m, budget);
  return m.with(solve_eta_hat_1(NeumannPoissonSolver(m.grid), m, budget.m0));
}

double beta_1(const Field& m, const ResourceBudget& budget) {
  return dirichlet_energy(eta_hat_1(m, budget)) / (budget.m0 * budget.m0);
}

Field beta_1_gradient(const Field& m, const ResourceBudget& budget) {
  Field e = eta_hat_1(m, budget);
  e.values *= 2.0 / budget.m0;
  return e;
}

double ExpansionCoefficients::population(double mu, int K) const {
  if (K < 0 || K > order) throw InvalidArgument("expansion: order out of range");
  double s = 0.0;
  for (int k = K; k >= 0; --k) s = s / mu + beta[k];
  return s;
}

Field ExpansionCoefficients::partial_sum(double mu, int K) const {
  if (K < 0 || K > order) throw InvalidArgument("expansion: order out of range");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(eta_hat[0].size());
  for (int k = K; k >= 0; --k) s = (s / mu).array() + beta[k] + eta_hat[k].values.array();
  return eta_hat[0].with(std::move(s));
}

ExpansionCoefficients expansion_coefficients(const Field& m, const ResourceBudget& budget, int K) {
  if (K < 1) throw InvalidArgument("expansion_coefficients: order must be at least 1");
  require_budget_mean(m, budget);
  const double m0 = budget.m0;
  const Grid& grid = m.grid;
  const NeumannPoissonSolver poisson(grid);

  ExpansionCoefficients c;
  c.order = K;
  c.eta_hat.push_back(Field::constant(grid, 0.0));
  c.beta.push_back(m0);
  // eta[k] = eta_hat[k] + beta[k] for k >= 1.
  std::vector<Eigen::VectorXd> eta{Eigen::VectorXd::Constant(grid.size(), m0)};

  auto close_order = [&](Eigen::VectorXd eh) {
    const std::size_t k = c.beta.size();
    double conv = 0.0;
    for (std::size_t l = 1; l < k; ++l) conv += mean(grid, eta[l].cwiseProduct(eta[k - l]));
    const double b = (mean(grid, m.values.cwiseProduct(eh)) - conv) / m0;
    eta.push_back(eh.array() + b);
    c.eta_hat.push_back(m.with(std::move(eh)));
    c.beta.push_back(b);
  };

  Eigen::VectorXd e1 = solve_eta_hat_1(poisson, m, m0);
  close_order(e1);
  // Equal by summation by parts; a mismatch means the solve went wrong.
  const double b1 = dirichlet_energy(grid, e1) / (m0 * m0);
  if (std::abs(b1 - c.beta[1]) > 1e-9 * std::max(std::abs(b1), 1e-300) + 1e-15) {
    throw Error("expansion_coefficients: beta_1 energy and moment forms disagree");
  }
  c.beta[1] = b1;
  eta[1] = e1.array() + b1;

  for (int k = 1; k < K; ++k) {
    Eigen::VectorXd rhs = (m.values.array() - 2.0 * m0).matrix().cwiseProduct(eta[k]);
    for (int l = 1; l < k; ++l) rhs -= eta[l].cwiseProduct(eta[k - l]);
    close_order(poisson.solve(-rhs, kCompatTol));
  }
  return c;
}

double limit_energy(const Field& m, const Field& u, const ResourceBudget& budget) {
  require_same_grid(m, u, "limit_energy");
  const double avg = mean(u);
  if (std::abs(avg) > kMeanTol * std::max(1.0, u.values.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "limit_energy: u has mean " << avg << ", expected zero";
    throw NonZeroMean(os.str());
  }
  return 0.5 * dirichlet_energy(u) - budget.m0 * mean(m.grid, m.values.cwiseProduct(u.values));
}

double limit_functional(const Field& m, const ResourceBudget& budget) {
  const Field e = eta_hat_1(m, budget);
  const double m0 = budget.m0;
  const double f1 = -2.0 * limit_energy(m, e, budget) / (m0 * m0);
  const double b1 = dirichlet_energy(e) / (m0 * m0);
  if (std::abs(f1 - b1) > 1e-10 * std::max(std::abs(b1), 1.0)) {
    std::ostringstream os;
    os << "limit_functional: -2 E_m(eta_hat_1)/m0^2 = " << f1 << " but beta_1 = " << b1;
    throw Error(os.str());
  }
  return f1;
}

ObjectiveFn limit_objective(const Grid& grid, const ResourceBudget& budget) {
  auto poisson = std::make_shared<const NeumannPoissonSolver>(grid);
  const double m0 = budget.m0;
  return [poisson, m0](const Field& m, const Evaluation*) {
    if (std::abs(mean(m) - m0) > kMeanTol) throw GaugeViolation("limit objective: mean(m) differs from m0");
    Eigen::VectorXd e = solve_eta_hat_1(*poisson, m, m0);
    const double value = dirichlet_energy(m.grid, e) / (m0 * m0);
    return Evaluation{value, m.with((2.0 / m0) * e), std::nullopt};
  };
}

OptimizationResult maximize_limit_functional(const Grid& grid, const ResourceBudget& budget,
                                             const OptimizerConfig& cfg) {
  OptimizationResult r = maximize_objective(limit_objective(grid, budget), grid, budget, cfg);
  r.bang_bang_fraction = bang_bang_fraction(r.m_star, budget);
  return r;
}

}  // namespace popsize
