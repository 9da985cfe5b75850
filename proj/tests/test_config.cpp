#include <filesystem>

#include "doctest.h"
#include "popsize/config.hpp"

using namespace popsize;

TEST_CASE("defaults round-trip through JSON") {
  const RunConfig a;
  const RunConfig b = RunConfig::from_json(a.to_json());
  CHECK(same_settings(a, b));
  CHECK(b.to_json() == a.to_json());
  CHECK_FALSE(b.mu.has_value());
}

TEST_CASE("non-default settings round-trip") {
  RunConfig a;
  a.experiment = "large_mu";
  a.domain.dimension = 2;
  a.domain.cells = {12, 30};
  a.m0 = 0.3;
  a.kappa = 2.0;
  a.mu = 0.1 + 0.2;  // not exactly representable in short decimal form
  a.sweep.values = {1e-3, 0.5};
  a.optimizer.starts = {"random", "crenel_left"};
  a.optimizer.solver.tol = 1e-12;
  a.seed = 99;
  a.threads = 3;
  const RunConfig b = RunConfig::from_json(a.to_json());
  CHECK(same_settings(a, b));
  REQUIRE(b.mu.has_value());
  CHECK(*b.mu == *a.mu);
  CHECK(b.domain == a.domain);
  CHECK(b.sweep == a.sweep);
  CHECK(b.optimizer.seed == 99);
}

TEST_CASE("partial documents keep defaults") {
  const RunConfig c = RunConfig::from_json(R"({"mu": 5, "solver": {"tol": 1e-9}})");
  CHECK(*c.mu == 5.0);
  CHECK(c.optimizer.solver.tol == 1e-9);
  CHECK(c.optimizer.max_iters == 5000);
  CHECK(c.m0 == 0.4);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(RunConfig::from_json(R"({"bogus": 1})"), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"solver": {"tolerance": 1}})"), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"mu": "fast"})"), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"domain": {"dimension": 3}})"), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json("{not json"), InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"optimizer": {"max_iters": 0}})"), InvalidArgument);
}

TEST_CASE("namespaced overrides") {
  RunConfig c;
  c.set("solver.tol=1e-12");
  c.set("opt.max-iters=200");
  c.set("mu=0.5");
  c.set("optimizer.starts=[\"random\"]");
  c.set("output_dir=out dir");
  CHECK(c.optimizer.solver.tol == 1e-12);
  CHECK(c.optimizer.max_iters == 200);
  CHECK(*c.mu == 0.5);
  CHECK(c.optimizer.starts == std::vector<std::string>{"random"});
  CHECK(c.output_dir == "out dir");
  CHECK_THROWS_AS(c.set("solver.nope=1"), InvalidArgument);
  CHECK_THROWS_AS(c.set("nosection.tol=1"), InvalidArgument);
  CHECK_THROWS_AS(c.set("solver.tol"), InvalidArgument);
  CHECK_THROWS_AS(c.set("solver.max_newton_iters=\"x\""), InvalidArgument);
}

TEST_CASE("save and load") {
  RunConfig c;
  c.mu = 2.0;
  const auto path = std::filesystem::temp_directory_path() / "popsize_test_config.json";
  c.save(path.string());
  CHECK(same_settings(RunConfig::load(path.string()), c));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), InvalidArgument);
}

TEST_CASE("domain and sweep grids") {
  DomainSpec d;
  CHECK(d.grid(1.0).cells(0) == default_cells(1.0));
  d.cells = {100, 0};
  CHECK(d.grid(1.0).cells(0) == 100);
  d.dimension = 2;
  d.cells = {0, 0};
  const Grid g = d.grid(1.0);
  CHECK(g.cells(0) == 24);
  CHECK(g.cells(1) == 48);

  SweepSpec s;
  const auto mus = s.grid();
  REQUIRE(mus.size() == 40);
  CHECK(mus.front() == 1e-3);
  CHECK(mus.back() == 1.0);
  for (std::size_t k = 1; k < mus.size(); ++k) CHECK(mus[k] / mus[k - 1] == doctest::Approx(std::pow(1e3, 1.0 / 39)));
  s.points = 1;
  CHECK_THROWS_AS(s.grid(), InvalidArgument);
}
