#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "popsize/rearrangement.hpp"
#include "popsize/steady_solver.hpp"

using namespace popsize;

namespace {
const ResourceBudget kBudget(0.4, 1.0);
constexpr Direction kUp = Direction::IncreasingTowardRight;
constexpr Direction kDown = Direction::DecreasingTowardRight;
}  // namespace

TEST_CASE("1D rearrangement") {
  const Grid g = Grid::interval(1.0, 20);
  const Field inc = Field::from_function(g, [](double x) { return x * x; });
  CHECK(monotone_rearrangement_1d(inc, kUp).values == inc.values);
  CHECK(monotone_rearrangement_1d(double_crenel(g, kBudget), kUp).values == crenel_right(g, kBudget).values);
  CHECK(monotone_rearrangement_1d(double_crenel(g, kBudget), kDown).values == crenel_left(g, kBudget).values);
  CHECK_THROWS_AS(monotone_rearrangement_1d(Field::constant(Grid::box(1, 1, 4, 4), 0.0)), InvalidArgument);
}

TEST_CASE("equimeasurability and idempotence") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 100; ++t) {
    const Field u = testing_helpers::random_field(Grid::interval(1.0, 57), rng, -2, 2);
    const Field r = monotone_rearrangement_1d(u);
    CHECK(equimeasurable(u, r));
    CHECK(monotone_rearrangement_1d(r).values == r.values);
    const Field b = testing_helpers::random_field(Grid::box(1.0, 2.0, 9, 13), rng);
    for (const auto& plan : {RearrangementPlan::xy(), RearrangementPlan::yx(kDown)}) {
      const Field s = symmetric_rearrangement_box(b, plan);
      CHECK(equimeasurable(b, s));
      CHECK(symmetric_rearrangement_box(s, plan).values == s.values);
    }
  }
}

TEST_CASE("box rearrangement") {
  const Grid g = Grid::box(1.0, 1.0, 8, 8);
  CHECK(symmetric_rearrangement_box(Field::constant(g, 0.3), RearrangementPlan::xy()).values ==
        Field::constant(g, 0.3).values);
  // Checkerboard of 2x2 blocks: every row and column holds four ones.
  Eigen::VectorXd v(64);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) v[g.index(i, j)] = ((i / 2 + j / 2) % 2 == 0) ? 1.0 : 0.0;
  const Field s = symmetric_rearrangement_box(Field(g, v), RearrangementPlan::xy());
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) CHECK(s[g.index(i, j)] == (i >= 4 ? 1.0 : 0.0));

  // An off-centre square block moves to the upper right corner.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(64);
  for (int j = 2; j < 5; ++j)
    for (int i = 1; i < 4; ++i) w[g.index(i, j)] = 1.0;
  const Field c = symmetric_rearrangement_box(Field(g, w), RearrangementPlan::xy());
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) CHECK(c[g.index(i, j)] == (i >= 5 && j >= 5 ? 1.0 : 0.0));

  CHECK_THROWS_AS(symmetric_rearrangement_box(Field(g, w), RearrangementPlan{{0, 0}, {kUp, kUp}}), InvalidArgument);
  CHECK_THROWS_AS(symmetric_rearrangement_box(Field(g, w), RearrangementPlan{{2}, {kUp}}), InvalidArgument);
}

TEST_CASE("polya inequality") {
  const Grid g = Grid::interval(1.0, 200);
  const Field mono = Field::from_function(g, [](double x) { return std::exp(x); });
  auto [a, b] = polya_check(mono, RearrangementPlan::along_x());
  CHECK(a == b);
  const Field s = Field::from_function(g, [](double x) { return std::sin(2 * std::numbers::pi * x); });
  auto [c, d] = polya_check(s, RearrangementPlan::along_x());
  CHECK(d < c);

  std::mt19937_64 rng(52);
  for (int t = 0; t < 100; ++t) {
    auto [e0, e1] = polya_check(testing_helpers::random_field(g, rng), RearrangementPlan::along_x());
    CHECK(e1 <= e0 * (1 + 1e-14));
    const Field b = testing_helpers::random_field(Grid::box(1.0, 2.0, 10, 14), rng);
    auto [f0, f1] = polya_check(b, RearrangementPlan::xy());
    CHECK(f1 <= f0 * (1 + 1e-14));
  }
}

TEST_CASE("hardy-littlewood inequality") {
  const Grid g = Grid::interval(1.0, 100);
  std::mt19937_64 rng(53);
  const Field u = testing_helpers::random_field(g, rng);
  auto [a, b] = hardy_littlewood_check(u, u);
  CHECK(std::abs(a - b) <= 1e-15);

  const Field inc = Field::from_function(g, [](double x) { return x; });
  const Field dec = Field::from_function(g, [](double x) { return 1 - x * x; });
  auto [c, d] = hardy_littlewood_check(inc, dec);
  CHECK(c < d);

  for (int t = 0; t < 100; ++t) {
    const Field p = testing_helpers::random_field(g, rng, -1, 1);
    const Field q = testing_helpers::random_field(g, rng, -1, 1);
    auto [x, y] = hardy_littlewood_check(p, q);
    CHECK(x <= y + 1e-12);
    const Grid box = Grid::box(1.0, 2.0, 8, 12);
    auto [z, w] = hardy_littlewood_check(testing_helpers::random_field(box, rng), testing_helpers::random_field(box, rng),
                                         RearrangementPlan::yx());
    CHECK(z <= w + 1e-12);
  }
  CHECK_THROWS_AS(hardy_littlewood_check(u, Field::constant(Grid::interval(1.0, 50), 0.0)), GridMismatch);
}

TEST_CASE("logistic energy decreases under rearrangement aligned with the crenel") {
  const Grid g = Grid::interval(1.0, 300);
  const Field m = crenel_right(g, kBudget);
  const SteadyState s = solve_steady_state(m, 1.0);
  const Field r = monotone_rearrangement_1d(s.theta, kUp);
  // theta is already nondecreasing, so the two energies agree.
  CHECK(logistic_energy(m, 1.0, s.theta) == doctest::Approx(logistic_energy(m, 1.0, r)).epsilon(1e-14));

  std::mt19937_64 rng(54);
  for (int t = 0; t < 20; ++t) {
    const Field u = testing_helpers::random_field(g, rng, 0.0, 1.0);
    CHECK(logistic_energy(m, 1.0, monotone_rearrangement_1d(u, kUp)) <= logistic_energy(m, 1.0, u) + 1e-14);
  }

  // The steady state minimizes the energy among positive fields.
  for (int t = 0; t < 5; ++t) {
    const Field p = testing_helpers::random_field(g, rng, -0.01, 0.01);
    CHECK(logistic_energy(m, 1.0, s.theta) <= logistic_energy(m, 1.0, s.theta.with(s.theta.values + p.values)));
  }
}
