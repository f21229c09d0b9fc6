#pragma once

// Eigendecomposition A = V diag(lambda) V^{-1} of a real diagonalizable
// state matrix, promoted to a scalar tier and refined there.

#include <Eigen/Core>

#include "netctl/precision.hpp"

namespace netctl {

template <typename Scalar>
struct EigDecomp {
  ComplexMatrixX<Scalar> vectors;  // V, unit columns
  ComplexMatrixX<Scalar> inverse;  // V^{-1}
  ComplexVectorX<Scalar> values;   // lambda
  double condition = 0.0;          // 2-norm condition number of V (hardware estimate)
  double residual = 0.0;           // max_i |A v_i - lambda_i v_i| / |A|, hardware stage
  double refined_offdiag = 0.0;    // max |(V^{-1} A V)_ij|, i != j, after refinement / |A|
  int refinement_steps = 0;

  Index size() const { return values.size(); }
};

/// Condition number above which V is treated as numerically defective.
inline constexpr double kMaxEigenvectorCondition = 1e12;

/// Hardware eigendecomposition followed, for extended tiers, by Newton
/// refinement of (V, lambda) in the scalar type until the off-diagonal part
/// of V^{-1} A V reaches working precision. Throws NumericalError for
/// near-defective input or failed convergence.
template <typename Scalar>
EigDecomp<Scalar> eig_decompose(const Eigen::MatrixXd& a, const PrecisionConfig& prec);

/// Same, for a state matrix already held in the scalar tier. The hardware
/// stage sees the rounded matrix; refinement targets the exact one.
template <typename Scalar>
EigDecomp<Scalar> eig_decompose_scalar(const MatrixX<Scalar>& a, const PrecisionConfig& prec);

/// e^{A tau} x through the decomposition (real part).
template <typename Scalar>
VectorX<Scalar> propagate(const EigDecomp<Scalar>& decomp, const VectorX<Scalar>& x,
                          const Scalar& tau);

/// e^{A^T tau} z = V^{-T} e^{Lambda tau} V^T z (real part).
template <typename Scalar>
VectorX<Scalar> propagate_transpose(const EigDecomp<Scalar>& decomp,
                                    const VectorX<Scalar>& z, const Scalar& tau);

}  // namespace netctl
