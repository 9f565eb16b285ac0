#pragma once

// Small dense symmetric linear algebra for the K x K Gibbs operators.

#include <cstddef>

#include <Eigen/Core>

namespace dqaem {

/// Eigenpairs of a symmetric matrix: A = V diag(eigenvalues) V^T.
///
/// Eigenvalues are ascending. Each eigenvector column is unit length with its
/// first nonzero entry nonnegative, so the decomposition is reproducible.
struct SpectralDecomp {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  /// V f(diag) V^T for the eigenvalue map f.
  template <typename F>
  Eigen::MatrixXd apply(F&& f) const {
    Eigen::VectorXd mapped = eigenvalues.unaryExpr(f);
    return eigenvectors * mapped.asDiagonal() * eigenvectors.transpose();
  }
};

inline constexpr std::size_t kMaxSymEigDim = 64;
inline constexpr int kJacobiMaxSweeps = 100;

/// Cyclic Jacobi eigensolver.
///
/// Throws std::invalid_argument when `a` is not square, exceeds kMaxSymEigDim,
/// or has an asymmetry larger than 1e-12.
SpectralDecomp sym_eig(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// exp(a) by scaling and squaring a truncated Taylor series. Intended as a
/// reference for the spectral route; it does not assume symmetry.
Eigen::MatrixXd matexp_taylor_oracle(const Eigen::Ref<const Eigen::MatrixXd>& a, int terms = 30);

/// log(sum_j exp(v_j)), shifted by max(v).
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace dqaem
