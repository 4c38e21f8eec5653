#ifndef TVOA_SPARSE_LINALG_HPP
#define TVOA_SPARSE_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvoa {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Symmetric sparse matrix. For symmetric operators column-compressed storage
/// coincides with row-compressed storage, so Eigen's default layout is used.
using SparseSymMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
/// General (rectangular) sparse operator.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a Cholesky factorization meets a non-positive pivot.
class NotSpdError : public SolverError {
public:
  using SolverError::SolverError;
};

/// Raised when the Schur complement of a bordered system is singular.
class SingularSchurError : public SolverError {
public:
  using SolverError::SolverError;
};

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

namespace detail {

inline void check_residual(const SparseSymMatrix& a, const Vector& x, const Vector& b, double tol,
                           const char* what) {
#ifdef TVOA_CHECK_RESIDUALS
  const double r = max_abs(a * x - b);
  if (!(r <= tol * (1.0 + max_abs(b))))
    throw SolverError(std::string(what) + ": residual " + std::to_string(r) + " exceeds bound");
#else
  (void)a;
  (void)x;
  (void)b;
  (void)tol;
  (void)what;
#endif
}

}  // namespace detail

/// Sparse Cholesky factorization (AMD ordering) of an SPD matrix.
/// Immutable after construction and cheap to copy (the factor is shared);
/// solve() may be called concurrently.
class SpdSolver {
public:
  SpdSolver() = default;

  explicit SpdSolver(SparseSymMatrix a) {
    if (a.rows() != a.cols()) throw SolverError("SpdSolver: matrix is not square");
    auto s = std::make_shared<State>();
    s->a = std::move(a);
    if (s->a.rows() > 0) {
      s->llt.compute(s->a);
      if (s->llt.info() != Eigen::Success)
        throw NotSpdError("SpdSolver: Cholesky factorization failed (matrix not SPD)");
    }
    state_ = std::move(s);
  }

  Eigen::Index size() const { return state_ ? state_->a.rows() : 0; }

  Vector solve(const Vector& b) const {
    if (b.size() != size()) throw SolverError("SpdSolver: dimension mismatch");
    if (size() == 0) return Vector();
    Vector x = state_->llt.solve(b);
    detail::check_residual(state_->a, x, b, 1e-10, "solve_spd");
    return x;
  }

  const SparseSymMatrix& matrix() const { return state_->a; }

private:
  struct State {
    SparseSymMatrix a;
    Eigen::SimplicialLLT<SparseSymMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  };
  std::shared_ptr<const State> state_;
};

/// Sparse LDL^T factorization without pivoting. Suitable for SPD and for
/// symmetric quasi-definite matrices [[H, B^T], [B, -G]] with H, G SPD.
class SymmetricSolver {
public:
  SymmetricSolver() = default;

  explicit SymmetricSolver(SparseSymMatrix a) {
    if (a.rows() != a.cols()) throw SolverError("SymmetricSolver: matrix is not square");
    auto s = std::make_shared<State>();
    s->a = std::move(a);
    if (s->a.rows() > 0) {
      s->ldlt.compute(s->a);
      if (s->ldlt.info() != Eigen::Success) throw SolverError("SymmetricSolver: LDL^T factorization failed");
      const Vector d = s->ldlt.vectorD();
      if ((d.array() == 0.0).any() || !d.allFinite()) throw SolverError("SymmetricSolver: singular matrix");
    }
    state_ = std::move(s);
  }

  Eigen::Index size() const { return state_ ? state_->a.rows() : 0; }

  Vector solve(const Vector& b) const {
    if (b.size() != size()) throw SolverError("SymmetricSolver: dimension mismatch");
    if (size() == 0) return Vector();
    Vector x = state_->ldlt.solve(b);
    detail::check_residual(state_->a, x, b, 1e-10, "SymmetricSolver::solve");
    return x;
  }

  const SparseSymMatrix& matrix() const { return state_->a; }

private:
  struct State {
    SparseSymMatrix a;
    Eigen::SimplicialLDLT<SparseSymMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  };
  std::shared_ptr<const State> state_;
};

/// Solves A x = b for SPD A by sparse Cholesky.
inline Vector solve_spd(const SparseSymMatrix& a, const Vector& b) { return SpdSolver(a).solve(b); }

/// Saddle system
///
///     [ base    border ] [ x  ]   [ rhs        ]
///     [ border' corner ] [ mu ] = [ rhs_border ]
///
/// with a factorized sparse base block and a few dense border columns.
struct BorderedSolution {
  Vector primal;
  Vector multipliers;
};

/// Block elimination once the base solves are available:
/// base_solution = base^{-1} rhs and base_times_border = base^{-1} border.
inline BorderedSolution solve_bordered_eliminated(const Vector& base_solution,
                                                  const DenseMatrix& base_times_border,
                                                  const DenseMatrix& border, const DenseMatrix& corner,
                                                  const Vector& rhs_border) {
  const Eigen::Index m = border.cols();
  if (corner.rows() != m || corner.cols() != m || rhs_border.size() != m ||
      base_times_border.cols() != m || base_times_border.rows() != border.rows() ||
      base_solution.size() != border.rows())
    throw SolverError("solve_bordered: dimension mismatch");
  BorderedSolution out;
  if (m == 0) {
    out.primal = base_solution;
    out.multipliers = Vector();
    return out;
  }
  const DenseMatrix schur = corner - border.transpose() * base_times_border;
  const Vector schur_rhs = rhs_border - border.transpose() * base_solution;

  Eigen::FullPivLU<DenseMatrix> lu(schur);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw SingularSchurError("solve_bordered: singular Schur complement");
  out.multipliers = lu.solve(schur_rhs);
  out.primal = base_solution - base_times_border * out.multipliers;
  return out;
}

template <class BaseSolver>
BorderedSolution solve_bordered(const BaseSolver& base, const DenseMatrix& border, const DenseMatrix& corner,
                                const Vector& rhs, const Vector& rhs_border) {
  if (border.rows() != base.size() || rhs.size() != base.size())
    throw SolverError("solve_bordered: dimension mismatch");
  DenseMatrix z(border.rows(), border.cols());
  for (Eigen::Index j = 0; j < border.cols(); ++j) z.col(j) = base.solve(border.col(j));
  BorderedSolution out = solve_bordered_eliminated(base.solve(rhs), z, border, corner, rhs_border);
#ifdef TVOA_CHECK_RESIDUALS
  const Vector r1 = base.matrix() * out.primal + border * out.multipliers - rhs;
  const Vector r2 = border.transpose() * out.primal + corner * out.multipliers - rhs_border;
  const double scale = 1.0 + std::max(max_abs(rhs), max_abs(rhs_border));
  if (std::max(max_abs(r1), max_abs(r2)) > 1e-9 * scale)
    throw SolverError("solve_bordered: residual exceeds bound");
#endif
  return out;
}

}  // namespace tvoa

#endif  // TVOA_SPARSE_LINALG_HPP
