#include "popsize/linear_solve.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <sstream>

namespace popsize {

namespace {

constexpr double kPivotFloor = 1e-13;

Tridiagonal<double> shifted_tridiagonal(const Grid& grid, double mu, const Eigen::VectorXd& d) {
  const Eigen::Index n = grid.size();
  const double w = mu / (grid.spacing(0) * grid.spacing(0));
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(n, w);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, w);
  Eigen::VectorXd diag = d.array() - 2.0 * w;
  lower[0] = 0.0;
  upper[n - 1] = 0.0;
  diag[0] += w;
  diag[n - 1] += w;
  return Tridiagonal<double>(std::move(lower), std::move(diag), std::move(upper));
}

}  // namespace

ShiftedLaplacianSolver::ShiftedLaplacianSolver(const Grid& grid, double mu, Eigen::VectorXd diagonal)
    : grid_(grid), mu_(mu), diag_(std::move(diagonal)) {
  if (diag_.size() != grid_.size()) throw InvalidArgument("shifted laplacian: diagonal size mismatch");
  if (!diag_.allFinite() || !std::isfinite(mu_)) throw InvalidArgument("shifted laplacian: non-finite data");

  if (grid_.dimension() == 1) {
    thomas_ = std::make_unique<Tridiagonal<double>>(shifted_tridiagonal(grid_, mu_, diag_));
    relative_pivot_ = thomas_->relative_pivot();
    if (relative_pivot_ > kPivotFloor) {
      backend_ = Backend::Thomas;
      return;
    }
    thomas_.reset();
  }

  matrix_ = mu_ * neumann_laplacian_matrix(grid_);
  for (Eigen::Index k = 0; k < grid_.size(); ++k) matrix_.coeffRef(k, k) += diag_[k];
  matrix_.makeCompressed();

  const bool negative_definite = (diag_.array() < 0.0).all();
  if (grid_.dimension() == 2 && grid_.size() <= kDirectLimit) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(matrix_);
    if (ldlt_->info() == Eigen::Success) {
      const auto& D = ldlt_->vectorD();
      const double scale = D.cwiseAbs().maxCoeff();
      relative_pivot_ = scale > 0 ? D.cwiseAbs().minCoeff() / scale : 0.0;
      if (relative_pivot_ > kPivotFloor) {
        backend_ = Backend::Ldlt;
        return;
      }
    }
    ldlt_.reset();
  } else if (grid_.dimension() == 2 && negative_definite) {
    backend_ = Backend::Cg;
    return;
  }

  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(matrix_);
  lu_->factorize(matrix_);
  if (lu_->info() != Eigen::Success) {
    throw SingularSystem("shifted laplacian: matrix is numerically singular", relative_pivot_);
  }
  backend_ = Backend::Lu;
}

Eigen::VectorXd ShiftedLaplacianSolver::apply(const Eigen::VectorXd& x) const {
  return mu_ * apply_neumann_laplacian(grid_, x) + diag_.cwiseProduct(x);
}

Eigen::VectorXd ShiftedLaplacianSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x;
  switch (backend_) {
    case Backend::Thomas:
      x = thomas_->solve(rhs);
      break;
    case Backend::Ldlt:
      x = ldlt_->solve(rhs);
      break;
    case Backend::Lu:
      x = lu_->solve(rhs);
      break;
    case Backend::Cg: {
      // CG needs an SPD matrix: solve (-A) x = -rhs.
      Eigen::SparseMatrix<double> neg = -matrix_;
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      cg.setTolerance(1e-14);
      cg.setMaxIterations(int(std::min<Eigen::Index>(20 * grid_.size(), 1000000)));
      cg.compute(neg);
      x = cg.solve(-rhs);
      if (cg.info() != Eigen::Success) {
        throw NoConvergence("shifted laplacian: conjugate gradient did not converge", cg.error());
      }
      break;
    }
  }
  if (!x.allFinite()) throw SingularSystem("shifted laplacian: non-finite solution", relative_pivot_);
  return x;
}

NeumannPoissonSolver::NeumannPoissonSolver(const Grid& grid) : grid_(grid) {
  if (grid_.dimension() == 1) {
    // -L with cell 0 pinned: row and column 0 replaced by the identity.
    const Eigen::Index n = grid_.size();
    const double w = 1.0 / (grid_.spacing(0) * grid_.spacing(0));
    Eigen::VectorXd lower = Eigen::VectorXd::Constant(n, -w);
    Eigen::VectorXd upper = Eigen::VectorXd::Constant(n, -w);
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 2.0 * w);
    diag[n - 1] = w;
    diag[0] = 1.0;
    upper[0] = 0.0;
    lower[1] = 0.0;
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    thomas_ = std::make_unique<Tridiagonal<double>>(std::move(lower), std::move(diag), std::move(upper));
    return;
  }
  Eigen::SparseMatrix<double> A = -neumann_laplacian_matrix(grid_);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (it.row() == 0 || it.col() == 0) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
    }
  }
  A.prune(0.0);
  ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(A);
  if (ldlt_->info() != Eigen::Success) throw SingularSystem("neumann poisson: factorization failed", 0.0);
}

Eigen::VectorXd NeumannPoissonSolver::solve(const Eigen::VectorXd& rhs, double compat_tol) const {
  if (rhs.size() != grid_.size()) throw InvalidArgument("neumann poisson: rhs size mismatch");
  const double avg = rhs.mean();
  const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
  if (std::abs(avg) > compat_tol * scale && std::abs(avg) > 1e-300) {
    std::ostringstream os;
    os << "neumann poisson: right side mean " << avg << " exceeds " << compat_tol << " x scale " << scale;
    throw GaugeViolation(os.str());
  }
  Eigen::VectorXd b = -(rhs.array() - avg).matrix();
  b[0] = 0.0;
  Eigen::VectorXd u = thomas_ ? thomas_->solve(b) : Eigen::VectorXd(ldlt_->solve(b));
  u.array() -= u.mean();
  return u;
}

}  // namespace popsize
