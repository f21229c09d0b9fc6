#pragma once

// Output-controllability Gramian
//
//   W_p = C V (Y o V^{-1} B B^T V^{-T}) V^T C^T,
//   Y_ij = (exp((lambda_i + lambda_j)(tf - t0)) - 1) / (lambda_i + lambda_j),
//
// which equals the integral over [t0, tf] of C e^{A(tf-s)} B B^T e^{A^T(tf-s)} C^T.
// Spectra, worst-case energies, principal-submatrix reductions, step ratios
// and interlacing audits operate on it in the chosen scalar tier.

#include <string>
#include <vector>

#include "netctl/control_config.hpp"
#include "netctl/eigen_decomposition.hpp"
#include "netctl/precision.hpp"
#include "netctl/symmetric_eigen.hpp"

namespace netctl {

template <typename Scalar>
struct Gramian {
  MatrixX<Scalar> matrix;   // symmetric p x p
  std::vector<Index> nodes;  // node behind each row; row labels for general C
  Horizon horizon;
  int digits = 100;

  Index size() const { return matrix.rows(); }
};

template <typename Scalar>
ComplexMatrixX<Scalar> compute_Y(const EigDecomp<Scalar>& decomp, const Horizon& horizon,
                                 const PrecisionConfig& prec);

/// Gramian for a general output matrix C (rows labelled 0..p-1).
template <typename Scalar>
Gramian<Scalar> compute_gramian(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& c, const Horizon& horizon,
                                const PrecisionConfig& prec);

/// Gramian for versor outputs on `targets`, the principal submatrix of the
/// full-state Gramian on those nodes.
template <typename Scalar>
Gramian<Scalar> compute_gramian(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& b,
                                const TargetSet& targets, const Horizon& horizon,
                                const PrecisionConfig& prec);

/// Full-state Gramian (C = I).
template <typename Scalar>
Gramian<Scalar> compute_full_gramian(const EigDecomp<Scalar>& decomp,
                                     const Eigen::MatrixXd& b, const Horizon& horizon,
                                     const PrecisionConfig& prec);

/// Full spectral decomposition by cyclic Jacobi, ascending.
template <typename Scalar>
SymmetricEigen<Scalar> spectrum(const Gramian<Scalar>& gram);

template <typename Scalar>
Scalar smallest_eigenvalue(const Gramian<Scalar>& gram);

template <typename Scalar>
struct WorstCaseEnergy {
  Scalar energy;  // 1 / mu_1
  double log10_energy = 0.0;
};

/// 1/mu_1; ControllabilityError if mu_1 is at or below 10^(-digits/2).
template <typename Scalar>
WorstCaseEnergy<Scalar> worst_case_energy(const Scalar& mu1, const PrecisionConfig& prec);

template <typename Scalar>
WorstCaseEnergy<Scalar> worst_case_energy(const Gramian<Scalar>& gram,
                                          const PrecisionConfig& prec);

/// Principal submatrix on `keep`, in keep's order. ConfigError if keep is not
/// a subset of the Gramian's nodes.
template <typename Scalar>
Gramian<Scalar> reduce(const Gramian<Scalar>& gram, const TargetSet& keep);

/// eta = mu_1(child) / mu_1(parent) >= 1 for a child obtained by removing
/// one target. NumericalError if the ratio falls below one by more than the
/// interlacing tolerance.
template <typename Scalar>
Scalar eta_step(const Gramian<Scalar>& parent, const Gramian<Scalar>& child,
                const PrecisionConfig& prec);

struct InterlacingReport {
  double max_violation = 0.0;    // largest amount by which an inequality fails
  std::size_t violations = 0;    // count above the interlacing tolerance
  std::size_t comparisons = 0;
  bool emax_non_decreasing = true;  // 1/mu_1 grows with the target count
};

/// Checks mu_k^(q) <= mu_k^(q-1) <= mu_{k+1}^(q) for every adjacent pair of
/// a nested chain (any order; consecutive sizes must differ by one).
template <typename Scalar>
InterlacingReport interlacing_audit(const std::vector<Gramian<Scalar>>& chain,
                                    const PrecisionConfig& prec);

/// CSV "index,eigenvalue" with eigenvalues as `digits`-digit decimals.
template <typename Scalar>
std::string spectrum_csv(const SymmetricEigen<Scalar>& eig, int digits);

}  // namespace netctl
