#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace netctl {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  std::size_t max_steps = 50'000'000;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dxdt)>;

/// States and derivatives at the requested checkpoints. Steps are clipped so
/// each checkpoint is hit exactly rather than interpolated.
struct OdeSolution {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> derivatives;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  /// Cubic Hermite interpolation between bracketing checkpoints; exact at
  /// the checkpoints themselves.
  Eigen::VectorXd state_at(double t) const;
};

/// Adaptive Dormand-Prince 5(4) from x(checkpoints.front()) = x0.
/// `checkpoints` must be strictly increasing. NumericalError on step-size
/// underflow or when the step budget is exhausted.
OdeSolution integrate_dopri5(const OdeRhs& rhs, const Eigen::VectorXd& x0,
                             const std::vector<double>& checkpoints,
                             const OdeOptions& options = {});

}  // namespace netctl
