#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "rgem/errors.hpp"

namespace rgem {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Symmetric matrix tagged as definite (Cholesky succeeded) or indefinite.
///
/// Construction symmetrizes the input as (A + A^T) / 2 and attempts a
/// Cholesky factorization once. The factor is reused by every solve.
template <typename Scalar>
class SpdMatrix {
 public:
  using MatrixType = Matrix<Scalar>;
  using Factor = Eigen::LLT<MatrixType, Eigen::Lower>;

  SpdMatrix() = default;

  template <typename Derived>
  explicit SpdMatrix(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) throw DimensionError("SpdMatrix: matrix is not square");
    if (a.rows() == 0) throw DimensionError("SpdMatrix: empty matrix");
    values_ = (a + a.transpose()) / Scalar(2);
    factorize();
  }

  static SpdMatrix identity(Eigen::Index dim, Scalar scale = Scalar(1)) {
    return SpdMatrix(MatrixType::Identity(dim, dim) * scale);
  }

  Eigen::Index dim() const { return values_.rows(); }
  const MatrixType& matrix() const { return values_; }
  bool definite() const { return definite_; }

  /// Cholesky factorization; throws IndefiniteError when a pivot was <= 0.
  const Factor& llt() const {
    if (!definite_) throw IndefiniteError("matrix is not positive definite");
    return llt_;
  }

 private:
  void factorize() {
    definite_ = false;
    if (!values_.allFinite()) return;
    llt_.compute(values_);
    definite_ = llt_.info() == Eigen::Success;
  }

  MatrixType values_;
  Factor llt_;
  bool definite_ = false;
};

using SpdMatrixd = SpdMatrix<double>;

/// Lower-triangular L with L * L^T == a.
template <typename Scalar>
Matrix<Scalar> cholesky(const SpdMatrix<Scalar>& a) {
  return a.llt().matrixL();
}

template <typename Scalar>
Scalar log_det(const SpdMatrix<Scalar>& a) {
  const auto& factor = a.llt().matrixLLT();
  return Scalar(2) * factor.diagonal().array().log().sum();
}

/// Solves a * x = b through the cached Cholesky factor.
template <typename Scalar, typename Derived>
Matrix<Scalar> solve_spd(const SpdMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& b) {
  if (b.rows() != a.dim()) throw DimensionError("solve_spd: right-hand side has wrong row count");
  return a.llt().solve(b);
}

/// v^T a^{-1} v, computed as ||L^{-1} v||^2.
template <typename Scalar, typename Derived>
Scalar quadratic_form(const SpdMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != a.dim()) throw DimensionError("quadratic_form: vector has wrong size");
  const auto& factor = a.llt();
  Vector<Scalar> w = v;
  factor.matrixL().solveInPlace(w);
  return w.squaredNorm();
}

/// Row-wise quadratic forms d_i^T a^{-1} d_i for the rows d_i of `rows`.
template <typename Scalar, typename Derived>
Vector<Scalar> quadratic_forms(const SpdMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& rows) {
  if (rows.cols() != a.dim()) throw DimensionError("quadratic_forms: wrong column count");
  const auto& factor = a.llt();
  Matrix<Scalar> w = rows.transpose();
  factor.matrixL().solveInPlace(w);
  return w.colwise().squaredNorm().transpose();
}

/// tr(a^{-1} b).
template <typename Scalar, typename Derived>
Scalar trace_solve(const SpdMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& b) {
  return solve_spd(a, b).trace();
}

template <typename Scalar>
struct EigExtremes {
  Scalar min_eig;
  Scalar max_eig;
};

/// Smallest and largest eigenvalue of a symmetric matrix (definite or not).
template <typename Derived>
EigExtremes<typename Derived::Scalar> eig_extremes(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

template <typename Scalar>
EigExtremes<Scalar> eig_extremes(const SpdMatrix<Scalar>& a) {
  return eig_extremes(a.matrix());
}

}  // namespace rgem
