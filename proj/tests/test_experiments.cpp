#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "popsize/experiments.hpp"
#include "popsize/rearrangement.hpp"

using namespace popsize;
namespace fs = std::filesystem;

namespace {

const ResourceBudget kBudget(0.4, 1.0);

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("popsize_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_files(const fs::path& dir, const std::string& ext) {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

}  // namespace

TEST_CASE("crenel shapes") {
  const Grid g = Grid::interval(1.0, 100);
  const CrenelShape r = crenel_shape(crenel_right(g, kBudget), kBudget);
  CHECK(r.blocks == 1);
  CHECK(r.touches_right);
  CHECK_FALSE(r.touches_left);
  CHECK(r.single_boundary());
  const CrenelShape d = crenel_shape(double_crenel(g, kBudget), kBudget);
  CHECK(d.blocks == 2);
  CHECK(d.touches_left);
  CHECK(d.touches_right);
  CHECK(d.asymmetry <= 1e-15);
  CHECK_FALSE(d.single_boundary());
  const Field interior = Field::from_function(g, [](double x) { return x > 0.3 && x < 0.7 ? 1.0 : 0.0; });
  CHECK(crenel_shape(interior, kBudget).blocks == 1);
  CHECK_FALSE(crenel_shape(interior, kBudget).single_boundary());
}

TEST_CASE("rearrangement defect and reflection distance") {
  const Grid g = Grid::box(1.0, 2.0, 10, 20);
  const Field corner = Field::from_function(g, [](double x, double y) { return x > 0.5 && y > 1.0 ? 1.0 : 0.0; });
  CHECK(rearrangement_defect(corner, 1e-9) == 0.0);
  CHECK(rearrangement_defect(reflect(corner, 1), 1e-9) == 0.0);
  const Field middle = Field::from_function(g, [](double x, double y) { return x > 0.3 && x < 0.7 && y > 1.0 ? 1.0 : 0.0; });
  CHECK(rearrangement_defect(middle, 1e-9) > 0.01);
  CHECK(l1_distance_mod_reflection(corner, reflect(reflect(corner, 0), 1)) == 0.0);
  CHECK(l1_distance_mod_reflection(corner, middle) > 0.0);
}

TEST_CASE("empty result set") {
  const fs::path dir = fresh_dir("empty");
  const auto written = emit_report({}, dir.string());
  CHECK(written.size() == 2);
  CHECK(slurp(dir / "verdicts.csv") == "experiment,check,passed,advisory,detail\n");
  CHECK(slurp(dir / "summary.txt") == "experiments: 0\n");
  fs::remove_all(dir);
}

TEST_CASE("report files and verdicts") {
  ExperimentReport r;
  r.name = "demo";
  r.check("ok", true, "fine");
  r.check("soft", false, "advisory, with comma", true);
  CHECK(r.passed());
  r.tables.push_back({"t", {"a", "b"}, {{1.0, 2.5}, {3.0, 4.0}}});
  r.fields.emplace_back("f", Field::constant(Grid::interval(1.0, 4), 0.4));
  r.fields.emplace_back("g", Field::constant(Grid::box(1.0, 1.0, 4, 4), 0.4));
  r.plots.push_back({"p", "title <x>", "x", "y", true, {{"s", {1e-3, 1e-1, 1.0}, {1.0, 2.0, 3.0}}}});
  const fs::path dir = fresh_dir("report");
  emit_report({r}, dir.string());
  CHECK(slurp(dir / "demo" / "t.csv") == "a,b\n1,2.5\n3,4\n");
  CHECK(slurp(dir / "demo" / "t.dat") == "# a b\n1 2.5\n3 4\n");
  CHECK(fs::exists(dir / "demo" / "f.svg"));
  CHECK(fs::exists(dir / "demo" / "g.svg"));
  const std::string svg = slurp(dir / "demo" / "p.svg");
  CHECK(svg.find("title &lt;x&gt;") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  const std::string verdicts = slurp(dir / "verdicts.csv");
  CHECK(verdicts.find("demo,ok,1,0,fine\n") != std::string::npos);
  CHECK(verdicts.find("demo,soft,0,1,advisory; with comma\n") != std::string::npos);

  r.check("hard", false, "broken");
  CHECK_FALSE(r.passed());
  fs::remove_all(dir);
}

TEST_CASE("I/O failures name the path") {
  const fs::path blocker = fresh_dir("blocker");
  std::ofstream(blocker) << "file, not a directory";
  try {
    emit_report({}, (blocker / "sub").string());
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
  fs::remove(blocker);
}

TEST_CASE("large-mu convergence in 1D is deterministic") {
  RunConfig cfg;
  cfg.domain.cells = {200, 0};
  const ExperimentReport a = run_large_mu_convergence(cfg);
  CHECK(a.passed());
  const ExperimentReport b = run_large_mu_convergence(cfg);
  const fs::path da = fresh_dir("det_a"), db = fresh_dir("det_b");
  const auto wa = emit_report({a}, da.string());
  emit_report({b}, db.string());
  int compared = 0;
  for (const std::string& p : wa) {
    const fs::path rel = fs::relative(p, da);
    CHECK(slurp(da / rel) == slurp(db / rel));
    ++compared;
  }
  CHECK(compared > 3);
  fs::remove_all(da);
  fs::remove_all(db);
}

TEST_CASE("large-mu convergence on a box") {
  RunConfig cfg;
  cfg.domain.dimension = 2;
  cfg.domain.cells = {12, 24};
  const ExperimentReport r = run_large_mu_convergence(cfg);
  CHECK(r.name == "large_mu_2d");
  for (const CheckResult& c : r.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("regime gallery emits six field plots") {
  RunConfig cfg;
  cfg.domain.cells = {1000, 0};
  const ExperimentReport r = run_regime_gallery(cfg);
  for (const CheckResult& c : r.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  const fs::path dir = fresh_dir("gallery");
  emit_report({r}, dir.string());
  CHECK(count_files(dir, ".svg") == 6);
  fs::remove_all(dir);
}

TEST_CASE("fragmentation sweep") {
  RunConfig cfg;
  cfg.domain.cells = {800, 0};
  cfg.sweep.points = 12;
  cfg.sweep.min = 2e-3;
  const ExperimentReport r = run_fragmentation_experiment(cfg);
  CHECK(r.passed());
  REQUIRE(r.tables.size() == 2);
  CHECK(r.tables[0].rows.size() == 12);
  const double mu1 = r.tables[1].rows[0][0];
  CHECK(mu1 > 2e-3);
  CHECK(mu1 < 1.0);

  cfg.sweep.values = {0.3, 0.5, 1.0};  // F_mu(double) decreases here
  CHECK_THROWS_AS(run_fragmentation_experiment(cfg), SweepTooCoarse);
  cfg.domain.dimension = 2;
  CHECK_THROWS_AS(run_fragmentation_experiment(cfg), InvalidArgument);
}

TEST_CASE("experiment dispatch") {
  CHECK(experiment_names().size() == 4);
  CHECK_THROWS_AS(run_experiment("nope", RunConfig{}), InvalidArgument);
}
