#pragma once

#include <random>

#include "popsize/grid.hpp"

namespace testing_helpers {

// Smooth-ish random field in [lo, hi].
inline popsize::Field random_field(const popsize::Grid& g, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  Eigen::VectorXd v(g.size());
  for (auto& x : v) x = U(rng);
  return popsize::Field(g, v);
}

// Random bounded direction with zero mean, |h| <= 1.
inline popsize::Field random_direction(const popsize::Grid& g, std::mt19937_64& rng) {
  popsize::Field h = random_field(g, rng, -1.0, 1.0);
  h.values.array() -= h.values.mean();
  h.values /= h.values.cwiseAbs().maxCoeff();
  return h;
}

}  // namespace testing_helpers
