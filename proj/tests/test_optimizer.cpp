#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "popsize/optimizer.hpp"

using namespace popsize;

namespace {

const ResourceBudget kBudget(0.4, 1.0);

// Independent projection oracle: walk the sorted breakpoints of the piecewise
// linear map s -> sum clip(x + s, 0, kappa) and solve on the bracketing piece.
Eigen::VectorXd projection_oracle(const Eigen::VectorXd& x, double m0, double kappa) {
  const auto n = x.size();
  std::vector<double> bp;
  for (auto v : x) {
    bp.push_back(-v);
    bp.push_back(kappa - v);
  }
  std::sort(bp.begin(), bp.end());
  auto total = [&](double s) { return (x.array() + s).max(0.0).min(kappa).sum(); };
  const double target = m0 * double(n);
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k], b = bp[k + 1];
    const double ta = total(a), tb = total(b);
    if (ta <= target && target <= tb) {
      const double s = tb > ta ? a + (target - ta) * (b - a) / (tb - ta) : a;
      return (x.array() + s).max(0.0).min(kappa).matrix();
    }
  }
  return Eigen::VectorXd();
}

double crenel_distance(const Field& m) {
  return std::min(l1_distance(m, crenel_right(m.grid, kBudget)), l1_distance(m, crenel_left(m.grid, kBudget)));
}

}  // namespace

TEST_CASE("projection onto the admissible set") {
  const Grid g = Grid::interval(1.0, 40);
  const Field cr = crenel_right(g, kBudget);
  CHECK(project_onto_admissible(cr, kBudget).values == cr.values);
  const Field zero = project_onto_admissible(Field::constant(g, 0.0), kBudget);
  CHECK((zero.values.array() - 0.4).abs().maxCoeff() <= 1e-15);

  std::mt19937_64 rng(61);
  for (int t = 0; t < 50; ++t) {
    const Field raw = testing_helpers::random_field(Grid::interval(1.0, 16), rng, -2.0, 3.0);
    const Field p = project_onto_admissible(raw, kBudget);
    CHECK(std::abs(mean(p) - 0.4) <= 1e-12);
    CHECK(p.values.minCoeff() >= 0.0);
    CHECK(p.values.maxCoeff() <= 1.0);
    const Eigen::VectorXd o = projection_oracle(raw.values, 0.4, 1.0);
    REQUIRE(o.size() == 16);
    CHECK((p.values - o).cwiseAbs().maxCoeff() <= 1e-12);
  }
  ResourceBudget bad(0.4, 1.0);
  bad.m0 = 1.5;
  CHECK_THROWS_AS(project_onto_admissible(Field::constant(g, 0.0), bad), InfeasibleBudget);
}

TEST_CASE("named starts are admissible") {
  for (const Grid& g : {Grid::interval(1.0, 33), Grid::box(1.0, 2.0, 8, 12)}) {
    for (const char* name : {"constant", "crenel_left", "crenel_right", "double_crenel", "random"}) {
      const Field m = initial_field(name, g, kBudget, 3);
      CHECK(std::abs(mean(m) - 0.4) <= 1e-12);
      CHECK(m.values.minCoeff() >= 0.0);
      CHECK(m.values.maxCoeff() <= 1.0);
    }
    CHECK_THROWS_AS(initial_field("nope", g, kBudget, 0), InvalidArgument);
  }
  const Grid g = Grid::interval(1.0, 50);
  CHECK(initial_field("random", g, kBudget, 7).values == initial_field("random", g, kBudget, 7).values);
}

TEST_CASE("default cell count") {
  CHECK(default_cells(1.0) == 1000);
  CHECK(default_cells(100.0) == 64);
  CHECK(default_cells(1e-6) == 100000);
}

TEST_CASE("mu = 1: single crenel beats the double crenel") {
  const Grid g = Grid::interval(1.0, 500);
  const OptimizationResult r = maximize(1.0, g, kBudget);
  CHECK(crenel_distance(r.m_star) <= 2.0 * g.spacing(0));
  CHECK(r.objective > population(double_crenel(g, kBudget), 1.0));
  CHECK(r.bang_bang_fraction >= 0.99);
  CHECK(r.theta.has_value());
  CHECK(r.phi.has_value());
  CHECK(r.starts.size() == 5);
}

TEST_CASE("mu = 0.01: symmetric double crenel is optimal") {
  const Grid g = Grid::interval(1.0, 1000);
  const OptimizationResult r = maximize(0.01, g, kBudget);
  CHECK(l1_distance(r.m_star, double_crenel(g, kBudget)) <= 2.0 * g.spacing(0));
  CHECK(r.objective > population(crenel_right(g, kBudget), 0.01));
  const CertificationReport c = certify(r, 0.01, kBudget);
  CHECK(c.levels.saturated_measure > 0.0);
}

TEST_CASE("mu = 1000: within two cells of a boundary crenel") {
  const Grid g = Grid::interval(1.0, 1000);
  const OptimizationResult r = maximize(1000.0, g, kBudget);
  CHECK(crenel_distance(r.m_star) <= 2.0 * g.spacing(0) * kBudget.kappa);
  CHECK(r.bang_bang_fraction >= 0.99);
}

TEST_CASE("iterates stay admissible and the objective never decreases") {
  const Grid g = Grid::interval(1.0, 300);
  OptimizerConfig cfg;
  const ObjectiveFn obj = population_objective(0.05);
  for (const char* name : {"constant", "random"}) {
    const OptimizationResult r = projected_gradient_ascent(obj, initial_field(name, g, kBudget, 5), kBudget, cfg);
    CHECK(std::abs(mean(r.m_star) - 0.4) <= 1e-10);
    CHECK(r.m_star.values.minCoeff() >= 0.0);
    CHECK(r.m_star.values.maxCoeff() <= 1.0);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k].objective >= r.history[k - 1].objective);
    CHECK(r.objective >= 0.4);
  }
}

TEST_CASE("starts agree at mu = 100") {
  const Grid g = Grid::interval(1.0, 500);
  const OptimizationResult r = maximize(100.0, g, kBudget);
  for (const StartSummary& s : r.starts) {
    CHECK(s.error.empty());
    CHECK(std::abs(s.objective - r.objective) <= 1e-6 * r.objective);
  }
}

TEST_CASE("certification") {
  const Grid g = Grid::interval(1.0, 1000);
  const OptimizationResult r = maximize(5.0, g, kBudget);
  const CertificationReport c = certify(r, 5.0, kBudget);
  CHECK(c.passed);
  CHECK(c.levels.violation_fraction <= 0.01);
  CHECK(c.levels.bang_bang_fraction >= 0.99);

  OptimizationResult flat = r;
  flat.m_star = Field::constant(g, 0.4);
  flat.theta.reset();
  const CertificationReport f = certify(flat, 5.0, kBudget);
  CHECK_FALSE(f.passed);
  CHECK_FALSE(f.failures.empty());
}

TEST_CASE("failing starts are skipped, parallel runs match serial ones") {
  const Grid g = Grid::interval(1.0, 200);
  OptimizerConfig cfg;
  cfg.starts = {"crenel_left", "bogus", "random"};
  const OptimizationResult r = maximize(2.0, g, kBudget, cfg);
  REQUIRE(r.starts.size() == 3);
  CHECK_FALSE(r.starts[1].error.empty());
  cfg.parallel = true;
  const OptimizationResult p = maximize(2.0, g, kBudget, cfg);
  CHECK(p.objective == r.objective);
  CHECK(p.m_star.values == r.m_star.values);

  cfg.starts = {"bogus"};
  CHECK_THROWS_AS(maximize(2.0, g, kBudget, cfg), NoConvergence);
  cfg.max_iters = 0;
  CHECK_THROWS_AS(maximize(2.0, g, kBudget, cfg), InvalidArgument);
}
