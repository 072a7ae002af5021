#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "glbandit/errors.hpp"

namespace glb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Cholesky factor of an SPD matrix; solves never form an explicit inverse.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(const Matrix& m) { reset(m); }

  void reset(const Matrix& m) {
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) throw SingularMatrix("Cholesky factorization failed");
  }

  Vector solve(const Vector& b) const { return llt_.solve(b); }
  Matrix solve_matrix(const Matrix& B) const { return llt_.solve(B); }

  /// a^T M^{-1} a
  double inverse_quadratic(const Vector& a) const {
    const Vector y = llt_.matrixL().solve(a);
    return y.squaredNorm();
  }

  /// ||a||_{M^{-1}}
  double inverse_norm(const Vector& a) const { return std::sqrt(inverse_quadratic(a)); }

 private:
  Eigen::LLT<Matrix> llt_;
};

/// ||a||_{M^{-1}} = sqrt(a^T M^{-1} a) for SPD M.
inline double mahalanobis_norm(const Vector& a, const Matrix& M) {
  if (a.size() != M.rows() || M.rows() != M.cols()) throw InvalidArgument("mahalanobis_norm: dimension mismatch");
  return SpdFactor(M).inverse_norm(a);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace glb
