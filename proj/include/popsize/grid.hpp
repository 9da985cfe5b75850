#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>

#include "popsize/errors.hpp"

namespace popsize {

/// Uniform cell-centered grid on the interval (0,a1) or the box (0,a1)x(0,a2).
///
/// Cells are numbered with the x index running fastest: index = i + nx*j.
class Grid {
 public:
  static Grid interval(double length, int cells);
  static Grid box(double a1, double a2, int nx, int ny);

  int dimension() const { return dim_; }
  int cells(int axis) const { return cells_[axis]; }
  double extent(int axis) const { return extents_[axis]; }
  double spacing(int axis) const { return extents_[axis] / cells_[axis]; }

  Eigen::Index size() const {
    return dim_ == 1 ? cells_[0] : Eigen::Index(cells_[0]) * cells_[1];
  }
  double cell_volume() const;
  /// |Omega|.
  double measure() const;

  /// Cell center coordinate along an axis.
  double center(int axis, int i) const { return (i + 0.5) * spacing(axis); }
  Eigen::Index index(int i, int j = 0) const { return i + Eigen::Index(cells_[0]) * j; }

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

  std::string describe() const;

 private:
  Grid(int dim, std::array<double, 2> extents, std::array<int, 2> cells);

  int dim_ = 1;
  std::array<double, 2> extents_{1.0, 1.0};
  std::array<int, 2> cells_{4, 1};
};

/// Grid function: one real value per cell.
struct Field {
  Grid grid;
  Eigen::VectorXd values;

  Field(Grid g, Eigen::VectorXd v);

  static Field constant(const Grid& g, double c);
  static Field from_function(const Grid& g, const std::function<double(double)>& f);
  static Field from_function(const Grid& g, const std::function<double(double, double)>& f);

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index k) const { return values[k]; }
  double& operator[](Eigen::Index k) { return values[k]; }

  /// Same grid, new values.
  Field with(Eigen::VectorXd v) const { return Field(grid, std::move(v)); }

  bool all_finite() const { return values.allFinite(); }
};

void require_same_grid(const Field& a, const Field& b, const char* where);

/// Admissible-set parameters: 0 <= m <= kappa, mean(m) = m0.
struct ResourceBudget {
  double m0 = 0.4;
  double kappa = 1.0;

  ResourceBudget(double mean_resource, double cap);
  /// Length fraction l = m0/kappa of a bang-bang field.
  double crenel_length() const { return m0 / kappa; }
};

/// Second-order Neumann Laplacian (ghost-cell reflection) applied to raw values.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> apply_neumann_laplacian(
    const Grid& grid, const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(u.size());
  const int nx = grid.cells(0);
  const int ny = grid.dimension() == 1 ? 1 : grid.cells(1);
  const Scalar ix2 = Scalar(1) / (grid.spacing(0) * grid.spacing(0));
  const Scalar iy2 = grid.dimension() == 1 ? Scalar(0) : Scalar(1) / (grid.spacing(1) * grid.spacing(1));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Eigen::Index k = grid.index(i, j);
      Scalar acc(0);
      if (i > 0) acc += (u[k - 1] - u[k]) * ix2;
      if (i + 1 < nx) acc += (u[k + 1] - u[k]) * ix2;
      if (grid.dimension() == 2) {
        if (j > 0) acc += (u[k - nx] - u[k]) * iy2;
        if (j + 1 < ny) acc += (u[k + nx] - u[k]) * iy2;
      }
      out[k] = acc;
    }
  }
  return out;
}

/// Neumann Laplacian L as a sparse matrix (symmetric, L*1 = 0).
Eigen::SparseMatrix<double> neumann_laplacian_matrix(const Grid& grid);

Field neumann_laplacian_apply(const Field& u);

/// Volume-weighted average over the domain.
double mean(const Field& u);
double mean(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Average of |grad u|^2 from face-centered differences; boundary faces carry zero flux.
double dirichlet_energy(const Field& u);
double dirichlet_energy(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Average of |grad u|^2 / w_f^2 where w_f is the arithmetic face average of w.
double weighted_dirichlet_energy(const Field& u, const Field& w);

/// L1(Omega) distance: integral of |a - b|.
double l1_distance(const Field& a, const Field& b);

/// x -> a1 - x (axis 0) or y -> a2 - y (axis 1).
Field reflect(const Field& u, int axis);

// Named resource shapes on the interval (0,1)-style grids.

/// kappa * indicator of (a1 - l*a1, a1): the right boundary crenel.
Field crenel_right(const Grid& grid, const ResourceBudget& budget);
/// kappa * indicator of (0, l*a1).
Field crenel_left(const Grid& grid, const ResourceBudget& budget);
/// kappa * (indicator of (0, l/2) + indicator of (1 - l/2, 1)): the mirror-extended double crenel.
Field double_crenel(const Grid& grid, const ResourceBudget& budget);

/// Field CSV: header "x,value" (1D) or "x,y,value" (2D), one row per cell.
void write_field_csv(std::ostream& os, const Field& u);
void write_field_csv(const std::string& path, const Field& u);
Field read_field_csv(std::istream& is);
Field read_field_csv(const std::string& path);

}  // namespace popsize
