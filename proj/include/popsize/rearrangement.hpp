#pragma once

#include <utility>
#include <vector>

#include "popsize/grid.hpp"

namespace popsize {

/// Placement of the sorted values along an axis.
///
/// IncreasingTowardRight anchors superlevel sets at the right end of the axis,
/// {u_r > c} = (a - |{u > c}|, a).  This is what the classical construction
/// calls the "decreasing" rearrangement; DecreasingTowardRight is its mirror.
enum class Direction { IncreasingTowardRight, DecreasingTowardRight };

struct RearrangementPlan {
  std::vector<int> axis_order;
  std::vector<Direction> directions;

  /// Throws InvalidArgument on a repeated or out-of-range axis.
  void validate(int dimension) const;

  static RearrangementPlan along_x(Direction d = Direction::IncreasingTowardRight);
  /// Axis 0 then axis 1 (or the reverse), same direction on both.
  static RearrangementPlan xy(Direction d = Direction::IncreasingTowardRight);
  static RearrangementPlan yx(Direction d = Direction::IncreasingTowardRight);
};

/// Stable sort of the cell values into the requested monotone profile.
Field monotone_rearrangement_1d(const Field& u, Direction direction = Direction::IncreasingTowardRight);

/// Line-by-line 1D rearrangement along each planned axis, in order.
Field symmetric_rearrangement_box(const Field& u, const RearrangementPlan& plan);

/// Dispatches on the grid dimension (1D uses the first plan entry).
Field rearrange(const Field& u, const RearrangementPlan& plan);

/// Sorted value multisets are identical.
bool equimeasurable(const Field& a, const Field& b);

/// (dirichlet_energy(u), dirichlet_energy(u_r)).
std::pair<double, double> polya_check(const Field& u, const RearrangementPlan& plan);

/// (mean(u v), mean(u_r v_r)) with both fields rearranged by the same plan.
std::pair<double, double> hardy_littlewood_check(const Field& u, const Field& v,
                                                 const RearrangementPlan& plan = RearrangementPlan::along_x());

/// mu/2 int |grad u|^2 - 1/2 int m u^2 + 1/3 int u^3, whose unique positive
/// minimizer is the steady state.
double logistic_energy(const Field& m, double mu, const Field& u);

}  // namespace popsize
