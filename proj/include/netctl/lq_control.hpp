#pragma once

// Target control under the quadratic cost
//
//   J = 1/2 int x^T Q x + 2 x^T M u + u^T R u dt,
//
// solved by decoupling the Hamiltonian system with the stabilizing solution
// S of S Bb Bb^T S - S Ab - Ab^T S - Qb = 0:
//
//   u_c  = -R^{-1}(M^T + B^T S) x(t) + R^{-1} B^T e^{At^T(tf - t)} C^T Wt_p^{-1} bt,
//   Ab = A - B R^{-1} M^T,  Bb = B R^{-1/2},  Qb = Q - M R^{-1} M^T,
//   At = Ab - B R^{-1} B^T S,
//   Wt = int e^{At(tf - s)} B R^{-1} B^T e^{At^T(tf - s)} ds,
//   bt = yf - C e^{At(tf - t0)} x0.
//
// The CARE is solved in hardware precision by the Hamiltonian Schur method
// and then Newton-refined in the scalar tier, so At and Wt are accurate to
// working precision.

#include <memory>

#include <Eigen/Core>

#include "netctl/eigen_decomposition.hpp"
#include "netctl/gramian.hpp"
#include "netctl/min_energy.hpp"
#include "netctl/quadrature.hpp"

namespace netctl {

struct QuadraticCost {
  Eigen::MatrixXd q;  // n x n, symmetric PSD
  Eigen::MatrixXd m;  // n x m
  Eigen::MatrixXd r;  // m x m, symmetric PD

  /// Q = zeta I, M = 0, R = I.
  static QuadraticCost scaled_identity(Index n, Index m, double zeta);

  void validate(Index n, Index m) const;
};

struct BarMatrices {
  Eigen::MatrixXd a_bar;
  Eigen::MatrixXd b_bar;
  Eigen::MatrixXd q_bar;
  Eigen::MatrixXd r_inv;       // R^{-1}
  Eigen::MatrixXd r_inv_sqrt;  // principal R^{-1/2}
  Eigen::MatrixXd r_inv_mt;    // R^{-1} M^T
};

/// ConfigError if R is not symmetric positive definite, Q is not symmetric
/// PSD, or Qb is not PSD.
BarMatrices bar_matrices(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const QuadraticCost& cost);

struct RiccatiSolution {
  Eigen::MatrixXd s;
  double residual = 0.0;  // |S K S - S Ab - Ab^T S - Qb|_F / (1 + |S|_F^2)
  BarMatrices bars;
};

/// |S K S - S Ab - Ab^T S - Qb|_F with K = Bb Bb^T.
double care_residual(const Eigen::MatrixXd& s, const BarMatrices& bars);

/// Stabilizing CARE solution. Qb = 0 with Ab Hurwitz gives S = 0 directly;
/// otherwise the stable invariant subspace of [[Ab, -K], [-Qb, -Ab^T]] is
/// taken from a reordered complex Schur form and polished by one Newton
/// step. SolverError when no stabilizing solution exists, the subspace basis
/// is ill-conditioned, or the residual bound 1e-8 (1 + |S|_F^2) fails.
RiccatiSolution solve_care(const BarMatrices& bars);

/// Solves X A + A^T X = -F for Hurwitz A by complex Schur (Bartels-Stewart).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f);

/// Closed-loop data shared by every target set of one (A, B, cost).
template <typename Scalar>
struct ClosedLoop {
  MatrixX<Scalar> s;
  MatrixX<Scalar> gain;      // R^{-1}(M^T + B^T S), m x n
  MatrixX<Scalar> a_tilde;
  EigDecomp<Scalar> decomp;  // of a_tilde
  Eigen::MatrixXd b;
  Eigen::MatrixXd b_bar;     // B R^{-1/2}, Gramian kernel factor
  Eigen::MatrixXd b_r_inv;   // B R^{-1}, feedforward mixing
  double residual = 0.0;     // relative CARE residual in the scalar tier
  int newton_steps = 0;
};

/// Promotes the hardware CARE solution and Newton-refines it (Lyapunov
/// solves through the eigendecomposition of the current closed loop) until
/// the relative residual reaches 10^(-digits+10). NumericalError if it does
/// not get below 1e-8; SolverError if At is not Hurwitz.
template <typename Scalar>
ClosedLoop<Scalar> closed_loop(const Eigen::MatrixXd& b, const RiccatiSolution& care,
                               const PrecisionConfig& prec);

template <typename Scalar>
struct TildeSystem {
  Gramian<Scalar> w_tilde;
  SymmetricEigen<Scalar> spectrum;  // of w_tilde
  VectorX<Scalar> beta_tilde;
};

template <typename Scalar>
TildeSystem<Scalar> tilde_system(const ControlProblem& prob, const ClosedLoop<Scalar>& loop,
                                 const PrecisionConfig& prec);

struct LqTrajectory {
  ControlSignal signal;  // combined u_c1 + u_c2 on the report grid
  Trajectory trajectory;
};

/// Integrates x' = A x + B u_c with u_c1 fed back from the integrated state.
template <typename Scalar>
LqTrajectory lq_optimal_input(const ControlProblem& prob, const ClosedLoop<Scalar>& loop,
                              const TildeSystem<Scalar>& tilde, const PrecisionConfig& prec,
                              int points = kDefaultReportPoints, const OdeOptions& options = {});

template <typename Scalar>
struct LqEnergy {
  Scalar total;
  Scalar state_terms;     // int u1^T u1 + 2 u1^T u2
  Scalar feedforward;     // int u2^T u2
  Scalar quadratic_form;  // bt^T Wt_p^{-1} bt
};

/// Energy by Legendre-Gauss quadrature, with the closed-loop state at the
/// nodes evaluated modally in the scalar tier:
///   x(t) = V[a(t) o (V^{-1} x0 + P(b o w)) - P(c(t) o w)],
///   a_i = e^{l_i (t - t0)}, b_j = e^{l_j (tf - t0)}, c_j = e^{l_j (tf - t)},
///   P_ij = (V^{-1} K V^{-T})_ij / (l_i + l_j), w = V^T C^T Wt_p^{-1} bt.
template <typename Scalar>
LqEnergy<Scalar> lq_energy(const ControlProblem& prob, const ClosedLoop<Scalar>& loop,
                           const TildeSystem<Scalar>& tilde, const QuadratureRule& rule,
                           const PrecisionConfig& prec);

/// Same energy for an explicit maneuver bt and multiplier z = Wt_p^{-1} bt.
template <typename Scalar>
LqEnergy<Scalar> lq_energy(const ClosedLoop<Scalar>& loop, const TargetSet& targets,
                           const VectorX<Scalar>& beta_tilde, const VectorX<Scalar>& z,
                           const Eigen::VectorXd& x0, const QuadratureRule& rule);

}  // namespace netctl
