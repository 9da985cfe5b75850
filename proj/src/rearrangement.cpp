#include "popsize/rearrangement.hpp"

#include <algorithm>

namespace popsize {

void RearrangementPlan::validate(int dimension) const {
  if (axis_order.size() != directions.size()) {
    throw InvalidArgument("rearrangement plan: one direction per axis is required");
  }
  if (axis_order.empty()) throw InvalidArgument("rearrangement plan: no axes");
  std::vector<bool> seen(2, false);
  for (int a : axis_order) {
    if (a < 0 || a >= dimension) throw InvalidArgument("rearrangement plan: axis out of range");
    if (seen[a]) throw InvalidArgument("rearrangement plan: axis listed twice");
    seen[a] = true;
  }
}

RearrangementPlan RearrangementPlan::along_x(Direction d) { return {{0}, {d}}; }
RearrangementPlan RearrangementPlan::xy(Direction d) { return {{0, 1}, {d, d}}; }
RearrangementPlan RearrangementPlan::yx(Direction d) { return {{1, 0}, {d, d}}; }

namespace {

// Sorts the cells of one grid line in place; `stride` walks along the axis.
void sort_line(Eigen::VectorXd& v, Eigen::Index start, Eigen::Index stride, int n, Direction d,
               std::vector<double>& buf) {
  buf.resize(n);
  for (int i = 0; i < n; ++i) buf[i] = v[start + i * stride];
  std::stable_sort(buf.begin(), buf.end());
  for (int i = 0; i < n; ++i) {
    const int slot = d == Direction::IncreasingTowardRight ? i : n - 1 - i;
    v[start + slot * stride] = buf[i];
  }
}

}  // namespace

Field monotone_rearrangement_1d(const Field& u, Direction direction) {
  if (u.grid.dimension() != 1) throw InvalidArgument("monotone_rearrangement_1d: 1D field required");
  Eigen::VectorXd v = u.values;
  std::vector<double> buf;
  sort_line(v, 0, 1, u.grid.cells(0), direction, buf);
  return u.with(std::move(v));
}

Field symmetric_rearrangement_box(const Field& u, const RearrangementPlan& plan) {
  const Grid& g = u.grid;
  if (g.dimension() != 2) throw InvalidArgument("symmetric_rearrangement_box: 2D field required");
  plan.validate(2);
  const int nx = g.cells(0);
  const int ny = g.cells(1);
  Eigen::VectorXd v = u.values;
  std::vector<double> buf;
  for (std::size_t s = 0; s < plan.axis_order.size(); ++s) {
    if (plan.axis_order[s] == 0) {
      for (int j = 0; j < ny; ++j) sort_line(v, g.index(0, j), 1, nx, plan.directions[s], buf);
    } else {
      for (int i = 0; i < nx; ++i) sort_line(v, g.index(i, 0), nx, ny, plan.directions[s], buf);
    }
  }
  return u.with(std::move(v));
}

Field rearrange(const Field& u, const RearrangementPlan& plan) {
  if (u.grid.dimension() == 1) {
    plan.validate(1);
    return monotone_rearrangement_1d(u, plan.directions.front());
  }
  return symmetric_rearrangement_box(u, plan);
}

bool equimeasurable(const Field& a, const Field& b) {
  if (a.size() != b.size()) return false;
  std::vector<double> x(a.values.data(), a.values.data() + a.size());
  std::vector<double> y(b.values.data(), b.values.data() + b.size());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

std::pair<double, double> polya_check(const Field& u, const RearrangementPlan& plan) {
  return {dirichlet_energy(u), dirichlet_energy(rearrange(u, plan))};
}

std::pair<double, double> hardy_littlewood_check(const Field& u, const Field& v, const RearrangementPlan& plan) {
  if (u.grid != v.grid) throw GridMismatch("hardy_littlewood_check: fields live on different grids");
  const Field ur = rearrange(u, plan);
  const Field vr = rearrange(v, plan);
  return {mean(u.grid, u.values.cwiseProduct(v.values)), mean(u.grid, ur.values.cwiseProduct(vr.values))};
}

double logistic_energy(const Field& m, double mu, const Field& u) {
  require_same_grid(m, u, "logistic_energy");
  const Eigen::ArrayXd x = u.values.array();
  const double local = (-0.5 * m.values.array() * x * x + x * x * x / 3.0).mean();
  return u.grid.measure() * (0.5 * mu * dirichlet_energy(u) + local);
}

}  // namespace popsize
