#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "popsize/asymptotics.hpp"
#include "popsize/sensitivity.hpp"

using namespace popsize;

namespace {

const ResourceBudget kBudget(0.4, 1.0);

double fd_derivative(const Field& m, const Field& h, double mu, double eps) {
  SteadyOptions opt;
  opt.tol = 1e-13;
  const double fp = population(m.with(m.values + eps * h.values), mu, opt);
  const double fm = population(m.with(m.values - eps * h.values), mu, opt);
  return (fp - fm) / (2 * eps);
}

// Admissible interior resource so that m +- eps h stays admissible.
Field smooth_resource(const Grid& g) {
  if (g.dimension() == 1) return Field::from_function(g, [](double x) { return 0.4 + 0.2 * std::cos(3.0 * x); });
  return Field::from_function(g, [](double x, double y) { return 0.4 + 0.2 * std::cos(3.0 * x) * std::cos(y); });
}

}  // namespace

TEST_CASE("adjoint for the constant resource") {
  const Grid g = Grid::interval(1.0, 50);
  const Field m = Field::constant(g, 0.4);
  const SteadyState s = solve_steady_state(m, 0.7);
  const AdjointState a = solve_adjoint(m, s);
  CHECK((a.p.values.array() + 1.0 / 0.4).abs().maxCoeff() <= 1e-10);
  const Field gdens = gradient_density(s, a);
  CHECK((gdens.values.array() - 1.0).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("adjoint residual on random admissible resources") {
  std::mt19937_64 rng(8);
  const Grid g = Grid::interval(1.0, 300);
  for (int t = 0; t < 3; ++t) {
    const Field m = testing_helpers::random_field(g, rng, 0.0, 0.8);
    const SteadyState s = solve_steady_state(m, 1.0);
    const AdjointState a = solve_adjoint(m, s);
    CHECK(a.residual_inf <= 1e-10);
    CHECK(a.p.all_finite());
  }
}

TEST_CASE("adjoint at large mu approaches -1/m0") {
  const Grid g = Grid::interval(1.0, 400);
  const Field m = crenel_right(g, kBudget);
  double prev = 1e9;
  for (double mu : {100.0, 1000.0, 10000.0}) {
    const AdjointState a = solve_adjoint(m, solve_steady_state(m, mu));
    const double dev = (a.p.values.array() + 1.0 / 0.4).abs().maxCoeff();
    CHECK(dev * mu < 50.0);
    CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("adjoint gradient matches central finite differences (1D and 2D)") {
  std::mt19937_64 rng(12);
  for (const Grid& g : {Grid::interval(1.0, 200), Grid::box(1.0, 2.0, 16, 24)}) {
    const Field m = smooth_resource(g);
    const double mu = 0.5;
    const SteadyState s = solve_steady_state(m, mu);
    const Linearization lin(m, s);
    const Field gd = gradient_density(s, solve_adjoint(lin));
    for (int t = 0; t < 5; ++t) {
      const Field h = testing_helpers::random_direction(g, rng);
      const double exact = mean(g, h.values.cwiseProduct(gd.values));
      const double fd = fd_derivative(m, h, mu, 1e-5);
      CHECK(std::abs(exact - fd) <= 1e-5 * std::abs(exact));
      // Tangent and adjoint forms of the same derivative.
      const DirectionalDerivatives dd = directional_derivatives(lin, h);
      CHECK(std::abs(dd.first - exact) <= 1e-12 * h.values.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("second derivative matches finite differences of the first") {
  std::mt19937_64 rng(13);
  const Grid g = Grid::interval(1.0, 200);
  const Field m = smooth_resource(g);
  const double mu = 0.5;
  const Field h = testing_helpers::random_direction(g, rng);
  const double eps = 1e-4;
  auto first = [&](const Field& mm) { return directional_derivatives(mm, solve_steady_state(mm, mu), h).first; };
  const double fd = (first(m.with(m.values + eps * h.values)) - first(m.with(m.values - eps * h.values))) / (2 * eps);
  const double exact = directional_derivatives(m, solve_steady_state(m, mu), h).second;
  CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
}

TEST_CASE("zero direction") {
  const Grid g = Grid::interval(1.0, 40);
  const Field m = crenel_right(g, kBudget);
  const DirectionalDerivatives dd = directional_derivatives(m, solve_steady_state(m, 1.0), Field::constant(g, 0.0));
  CHECK(dd.first == 0.0);
  CHECK(dd.second == 0.0);
}

TEST_CASE("second derivative polarization is symmetric") {
  std::mt19937_64 rng(14);
  for (const Grid& g : {Grid::interval(1.0, 300), Grid::box(1.0, 2.0, 12, 20)}) {
    const Field m = crenel_right(g, kBudget);
    const Linearization lin(m, solve_steady_state(m, 0.8));
    for (int t = 0; t < 3; ++t) {
      const Field h1 = testing_helpers::random_direction(g, rng);
      const Field h2 = testing_helpers::random_direction(g, rng);
      const double q12 = directional_derivatives(lin, h1.with(h1.values + h2.values)).second;
      const double q1 = directional_derivatives(lin, h1).second;
      const double q2 = directional_derivatives(lin, h2).second;
      const double b12 = second_derivative_bilinear(lin, h1, h2);
      const double b21 = second_derivative_bilinear(lin, h2, h1);
      const double scale = std::abs(q1) + std::abs(q2) + std::abs(q12);
      CHECK(std::abs(b12 - b21) <= 1e-10 * scale);
      CHECK(std::abs((q12 - q1 - q2) - 2.0 * b12) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("second derivative is positive at mu = 100 around the crenel") {
  std::mt19937_64 rng(15);
  const Grid g = Grid::interval(1.0, 1000);
  const Field m = crenel_right(g, kBudget);
  const Linearization lin(m, solve_steady_state(m, 100.0));
  for (int t = 0; t < 10; ++t) CHECK(directional_derivatives(lin, testing_helpers::random_direction(g, rng)).second > 0.0);
}

TEST_CASE("gradient at large mu orders cells like eta_hat_1") {
  const Grid g = Grid::interval(1.0, 400);
  const Field m = crenel_right(g, kBudget);
  const SteadyState s = solve_steady_state(m, 1000.0);
  const Field gd = gradient_density(s, solve_adjoint(m, s));
  const Field e1 = eta_hat_1(m, kBudget);
  // Both are increasing in x for the right crenel.
  int agree = 0;
  for (Eigen::Index k = 1; k < g.size(); ++k) {
    const bool up_g = gd[k] > gd[k - 1];
    const bool up_e = e1[k] > e1[k - 1];
    agree += up_g == up_e;
  }
  CHECK(agree == g.size() - 1);
}

TEST_CASE("switching level is the crenel-length quantile") {
  const Grid g = Grid::interval(1.0, 10);
  const Field phi = Field::from_function(g, [](double x) { return 5.0 - x; });  // decreasing
  const Field m = crenel_right(g, kBudget);
  // Four smallest values belong to the four rightmost cells.
  const double c = estimate_switching_level(m, phi, kBudget);
  CHECK(c == doctest::Approx(0.5 * (phi[5] + phi[6])));
  const LevelSetReport r = level_set_report(m, phi, kBudget);
  CHECK(r.violation_fraction == 0.0);
  CHECK(r.bang_bang_fraction == 1.0);
  CHECK(r.saturated_measure == 1.0);
  const LevelSetReport wrong = level_set_report(crenel_left(g, kBudget), phi, kBudget);
  CHECK(wrong.violation_fraction > 0.5);
}

TEST_CASE("constant resource fails the level-set structure") {
  const Grid g = Grid::interval(1.0, 100);
  const Field m = Field::constant(g, 0.4);
  const SteadyState s = solve_steady_state(m, 1.0);
  const SwitchingFunction sw = switching_function(s, solve_adjoint(m, s));
  const LevelSetReport r = level_set_report(m, sw.phi, kBudget);
  CHECK(r.saturated_measure == 0.0);
  CHECK(r.bang_bang_fraction == 0.0);
  CHECK(r.intermediate_fraction == 1.0);
}

TEST_CASE("switching equation residual shrinks under refinement") {
  double prev = 1e9;
  for (int n : {100, 200, 400}) {
    const Grid g = Grid::interval(1.0, n);
    const Field m = Field::from_function(g, [](double x) { return 0.4 + 0.3 * std::cos(3.0 * x); });
    const SteadyState s = solve_steady_state(m, 0.5);
    const double r = switching_pde_residual(m, s, solve_adjoint(m, s));
    MESSAGE("switching residual N=" << n << ": " << r);
    CHECK(r < prev);
    prev = r;
  }
}
