#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "popsize/grid.hpp"

namespace popsize {

/// Tridiagonal matrix with a reusable Thomas factorization (no pivoting).
template <typename Scalar>
class Tridiagonal {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Tridiagonal(Vector lower, Vector diag, Vector upper)
      : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
    const auto n = diag_.size();
    if (n == 0 || lower_.size() != n || upper_.size() != n) {
      throw InvalidArgument("tridiagonal: band sizes must match");
    }
    factor();
  }

  Eigen::Index size() const { return diag_.size(); }

  /// Smallest |pivot| met during elimination, relative to the largest diagonal entry.
  Scalar relative_pivot() const { return relative_pivot_; }
  Scalar smallest_pivot() const { return smallest_pivot_; }

  template <typename Derived>
  Vector solve(const Eigen::MatrixBase<Derived>& rhs) const {
    const auto n = size();
    Vector y(n);
    y[0] = rhs[0] / pivot_[0];
    for (Eigen::Index i = 1; i < n; ++i) y[i] = (rhs[i] - lower_[i] * y[i - 1]) / pivot_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) y[i] -= ratio_[i] * y[i + 1];
    return y;
  }

  template <typename Derived>
  Vector apply(const Eigen::MatrixBase<Derived>& x) const {
    const auto n = size();
    Vector y = diag_.cwiseProduct(x);
    for (Eigen::Index i = 1; i < n; ++i) y[i] += lower_[i] * x[i - 1];
    for (Eigen::Index i = 0; i + 1 < n; ++i) y[i] += upper_[i] * x[i + 1];
    return y;
  }

 private:
  void factor() {
    const auto n = size();
    pivot_.resize(n);
    ratio_.resize(n);
    using std::abs;
    Scalar scale = diag_.cwiseAbs().maxCoeff();
    pivot_[0] = diag_[0];
    ratio_[0] = upper_[0] / pivot_[0];
    smallest_pivot_ = abs(pivot_[0]);
    for (Eigen::Index i = 1; i < n; ++i) {
      pivot_[i] = diag_[i] - lower_[i] * ratio_[i - 1];
      ratio_[i] = i + 1 < n ? upper_[i] / pivot_[i] : Scalar(0);
      smallest_pivot_ = std::min(smallest_pivot_, Scalar(abs(pivot_[i])));
    }
    relative_pivot_ = scale > Scalar(0) ? smallest_pivot_ / scale : Scalar(0);
  }

  Vector lower_, diag_, upper_;
  Vector pivot_, ratio_;
  Scalar smallest_pivot_{0};
  Scalar relative_pivot_{0};
};

/// Solver for the symmetric operator  mu*L + diag(d)  with Neumann L.
///
/// 1D uses a Thomas factorization; 2D uses a sparse LDLT on small grids and
/// Jacobi-preconditioned CG on large negative-definite systems. Any system with
/// a vanishing Thomas pivot falls back to a pivoted sparse LU. The
/// factorization is built once and reused across right-hand sides.
class ShiftedLaplacianSolver {
 public:
  ShiftedLaplacianSolver(const Grid& grid, double mu, Eigen::VectorXd diagonal);

  const Grid& grid() const { return grid_; }
  double mu() const { return mu_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Relative size of the smallest elimination pivot (1D), or NaN when unavailable.
  double relative_pivot() const { return relative_pivot_; }

  /// Cell count at or below which 2D systems are factored directly.
  static constexpr Eigen::Index kDirectLimit = 65536;

 private:
  enum class Backend { Thomas, Ldlt, Cg, Lu };

  Grid grid_;
  double mu_;
  Eigen::VectorXd diag_;
  Backend backend_ = Backend::Thomas;
  double relative_pivot_ = std::numeric_limits<double>::quiet_NaN();
  Eigen::SparseMatrix<double> matrix_;
  std::unique_ptr<Tridiagonal<double>> thomas_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// Zero-mean solution of  L u = rhs  (Neumann).  The right side must have zero
/// mean to within `compat_tol` times its scale; it is projected before solving
/// with one pinned cell, and the solution is re-centred.
class NeumannPoissonSolver {
 public:
  explicit NeumannPoissonSolver(const Grid& grid);

  const Grid& grid() const { return grid_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double compat_tol = 1e-9) const;

 private:
  Grid grid_;
  std::unique_ptr<Tridiagonal<double>> thomas_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

}  // namespace popsize
