#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popsize/grid.hpp"
#include "popsize/optimizer.hpp"

namespace popsize {

struct DomainSpec {
  int dimension = 1;
  std::array<double, 2> extents{1.0, 2.0};
  /// 0 selects a default: default_cells(mu) in 1D, 24 x 48 in 2D.
  std::array<int, 2> cells{0, 0};

  Grid grid(double mu) const;
  bool operator==(const DomainSpec&) const = default;
};

/// Log-spaced sweep, or an explicit list when `values` is non-empty.
struct SweepSpec {
  double min = 1e-3;
  double max = 1.0;
  int points = 40;
  std::vector<double> values;

  std::vector<double> grid() const;
  bool operator==(const SweepSpec&) const = default;
};

struct RunConfig {
  std::string experiment;
  DomainSpec domain;
  double m0 = 0.4;
  double kappa = 1.0;
  std::optional<double> mu;
  SweepSpec sweep;
  OptimizerConfig optimizer;
  std::string output_dir;
  std::uint64_t seed = 20240917;
  /// Worker threads for sweeps; 0 uses the hardware concurrency.
  int threads = 0;

  ResourceBudget budget() const { return ResourceBudget(m0, kappa); }

  /// Pretty-printed JSON document.
  std::string to_json() const;
  /// Unknown keys and ill-typed values throw InvalidArgument.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  /// Applies "section.key=value" overrides, e.g. "solver.tol=1e-12" or "opt.max-iters=200".
  void set(const std::string& assignment);
};

bool same_settings(const RunConfig& a, const RunConfig& b);

}  // namespace popsize
