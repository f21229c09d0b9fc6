#pragma once

#include <utility>

#include "netctl/precision.hpp"

namespace netctl {

template <typename Scalar>
struct SymmetricEigen {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // column k pairs with values(k)
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for real symmetric matrices. Rotations use the
/// Rutishauser update; a sweep cap of 50 raises NumericalError with the
/// remaining off-diagonal norm.
template <typename Scalar>
SymmetricEigen<Scalar> jacobi_eigen(const MatrixX<Scalar>& w, int max_sweeps = 50);

/// Smallest eigenvalue via Householder tridiagonalization and implicit QL
/// (no eigenvectors). Used where only mu_1 is needed.
template <typename Scalar>
Scalar smallest_symmetric_eigenvalue(const MatrixX<Scalar>& w);

/// (mu_1, v_1) with v_1 from shifted inverse iteration on the fast-path
/// eigenvalue; v_1 has unit norm and a positive largest entry.
template <typename Scalar>
std::pair<Scalar, VectorX<Scalar>> smallest_symmetric_eigenpair(const MatrixX<Scalar>& w);

/// Mean over i of |W v_i - mu_i v_i|.
template <typename Scalar>
Scalar mean_eigen_residual(const MatrixX<Scalar>& w, const SymmetricEigen<Scalar>& eig);

}  // namespace netctl
