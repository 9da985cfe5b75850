#pragma once

#include <string>
#include <vector>

#include "popsize/config.hpp"
#include "popsize/report.hpp"

namespace popsize {

/// Sweeps mu over cfg.sweep, compares the single crenel with the double crenel,
/// checks the mirror scaling identity F_mu(single; N) = F_{mu/4}(double; 2N) and
/// locates the first local maximizer mu1 of mu -> F_mu(double).  1D only.
/// Throws SweepTooCoarse when no interior local maximum is bracketed.
ExperimentReport run_fragmentation_experiment(const RunConfig& cfg);

/// Optimizer at mu in {0.01, 1, 5}: crenel count and placement of each maximizer,
/// m and theta profiles.  1D only.
ExperimentReport run_regime_gallery(const RunConfig& cfg);

/// Optimizer at mu in {10, 100, 1000} against the maximizer of the limit
/// functional, in 1D or on a box.
ExperimentReport run_large_mu_convergence(const RunConfig& cfg);

/// Principal-eigenvalue maximizer against the population maximizer.
ExperimentReport run_eigen_vs_population(const RunConfig& cfg);

std::vector<std::string> experiment_names();

/// Dispatch by name; unknown names throw InvalidArgument.
ExperimentReport run_experiment(const std::string& name, const RunConfig& cfg);

/// Number of crenel blocks (maximal runs with m > kappa/2) of a 1D field and
/// whether the outer blocks touch the ends.
struct CrenelShape {
  int blocks = 0;
  bool touches_left = false;
  bool touches_right = false;
  /// L1 distance between m and its mirror image.
  double asymmetry = 0.0;

  bool single_boundary() const { return blocks == 1 && (touches_left != touches_right); }
};

CrenelShape crenel_shape(const Field& m, const ResourceBudget& budget);

/// Smallest fraction of cells changed by a monotone rearrangement, over all
/// axis orders and directions.
double rearrangement_defect(const Field& m, double atol);

/// L1 distance minimized over the reflections of the domain.
double l1_distance_mod_reflection(const Field& a, const Field& b);

}  // namespace popsize
