#pragma once

// Minimum-energy target control
//
//   u*(t) = B^T e^{A^T(tf - t)} C^T (C W C^T)^{-1} beta,
//   beta  = yf - C e^{A(tf - t0)} x0,
//   E     = beta^T W_p^{-1} beta,
//
// with the Gramian inverse applied through its spectral decomposition.

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "netctl/control_config.hpp"
#include "netctl/eigen_decomposition.hpp"
#include "netctl/gramian.hpp"
#include "netctl/ode.hpp"
#include "netctl/quadrature.hpp"

namespace netctl {

inline constexpr int kDefaultReportPoints = 1001;

/// Boundary data of a target control problem on x' = A x + B u, y = C x.
struct ControlProblem {
  Eigen::MatrixXd a;
  InputSet inputs;
  TargetSet targets;
  Eigen::VectorXd x0;
  Eigen::VectorXd yf;
  Horizon horizon;

  Index n() const { return a.rows(); }
  Index m() const { return inputs.size(); }
  Index p() const { return targets.size(); }
  Eigen::MatrixXd input_matrix() const { return build_input_matrix(inputs, n()); }
  Eigen::MatrixXd output_matrix() const { return build_output_matrix(targets, n()); }
  void validate() const;
};

ControlProblem make_problem(const Network& net, InputSet inputs, TargetSet targets,
                            Eigen::VectorXd x0, Eigen::VectorXd yf, Horizon horizon);

template <typename Scalar>
struct Maneuver {
  VectorX<Scalar> beta;
  Scalar magnitude;
};

/// Sampled input u(t_k) on a uniform grid plus an evaluator on [t0, tf].
/// The samples are produced by the evaluator.
struct ControlSignal {
  Index channels = 0;
  std::vector<double> times;
  Eigen::MatrixXd samples;  // channels x times
  std::function<Eigen::VectorXd(double)> evaluator;

  Eigen::VectorXd operator()(double t) const { return evaluator(t); }
};

/// Wraps an evaluator and samples it on `points` uniform times.
ControlSignal make_signal(Index channels, std::function<Eigen::VectorXd(double)> evaluator,
                          const Horizon& horizon, int points = kDefaultReportPoints);

/// u(t) = G^T e^{A^T(tf - t)} z for a fixed n-vector z and n x m matrix G,
/// evaluated modally in the scalar tier.
template <typename Scalar>
struct ModalSignal {
  ComplexMatrixX<Scalar> mixing;   // G^T V^{-T}, m x n
  ComplexVectorX<Scalar> weights;  // V^T z
  ComplexVectorX<Scalar> rates;    // eigenvalues
  Scalar tf;

  VectorX<Scalar> evaluate(const Scalar& t) const;
};

template <typename Scalar>
ModalSignal<Scalar> modal_signal(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& g,
                                 const VectorX<Scalar>& z, double tf);

template <typename Scalar>
ControlSignal to_control_signal(std::shared_ptr<const ModalSignal<Scalar>> modal,
                                const Horizon& horizon, int points = kDefaultReportPoints);

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;   // n x times
  Eigen::MatrixXd outputs;  // p x times, y = C x

  Eigen::VectorXd final_state() const { return states.col(states.cols() - 1); }
  Eigen::VectorXd final_output() const { return outputs.col(outputs.cols() - 1); }
};

template <typename Scalar>
Maneuver<Scalar> maneuver(const ControlProblem& prob, const EigDecomp<Scalar>& decomp);

/// W_p^{-1} beta = sum_i v_i (v_i^T beta) / mu_i. ControllabilityError if
/// mu_1 is at or below the precision threshold.
template <typename Scalar>
VectorX<Scalar> apply_gramian_inverse(const SymmetricEigen<Scalar>& spec,
                                      const VectorX<Scalar>& beta,
                                      const PrecisionConfig& prec);

template <typename Scalar>
ControlSignal min_energy_input(const ControlProblem& prob, const Maneuver<Scalar>& man,
                               const SymmetricEigen<Scalar>& spec,
                               const EigDecomp<Scalar>& decomp, const PrecisionConfig& prec,
                               int points = kDefaultReportPoints);

/// beta^T W_p^{-1} beta.
template <typename Scalar>
Scalar energy_closed_form(const Maneuver<Scalar>& man, const SymmetricEigen<Scalar>& spec,
                          const PrecisionConfig& prec);

/// (beta^2 / mu_p, beta^2 / mu_1).
template <typename Scalar>
std::pair<Scalar, Scalar> energy_bounds(const Maneuver<Scalar>& man,
                                        const SymmetricEigen<Scalar>& spec);

/// Integrates x' = A x + B u(t) with adaptive Dormand-Prince (tolerances
/// 1e-10), reporting x and y = C x on `points` uniform times.
Trajectory simulate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                    const Horizon& horizon, const ControlSignal& u,
                    int points = kDefaultReportPoints, const OdeOptions& options = {});

Trajectory simulate(const ControlProblem& prob, const ControlSignal& u,
                    int points = kDefaultReportPoints, const OdeOptions& options = {});

/// (tf - t0)/2 sum_i w_i u(tau_i)^T u(tau_i).
double energy_quadrature(const ControlSignal& u, const QuadratureRule& rule);

/// |y(tf) - yf| / max(1, |yf|).
double reach_error(const Trajectory& traj, const Eigen::VectorXd& yf);

std::vector<double> uniform_grid(const Horizon& horizon, int points);

}  // namespace netctl
