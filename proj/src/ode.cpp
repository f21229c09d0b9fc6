#include "netctl/ode.hpp"

#include <algorithm>
#include <cmath>

#include "netctl/error.hpp"

namespace netctl {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Eigen::VectorXd OdeSolution::state_at(double t) const {
  if (times.empty()) throw ConfigError("empty ODE solution");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  const double ta = times[k - 1];
  const double tb = times[k];
  if (t == ta) return states[k - 1];
  const double h = tb - ta;
  const double s = (t - ta) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * states[k - 1] + h10 * h * derivatives[k - 1] + h01 * states[k] +
         h11 * h * derivatives[k];
}

OdeSolution integrate_dopri5(const OdeRhs& rhs, const Eigen::VectorXd& x0,
                             const std::vector<double>& checkpoints,
                             const OdeOptions& options) {
  if (checkpoints.empty()) throw ConfigError("ODE integration needs checkpoints");
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (!(checkpoints[i] > checkpoints[i - 1])) {
      throw ConfigError("ODE checkpoints must be strictly increasing");
    }
  }
  const Eigen::Index n = x0.size();
  OdeSolution sol;
  sol.times = checkpoints;
  sol.states.reserve(checkpoints.size());
  sol.derivatives.reserve(checkpoints.size());

  double t = checkpoints.front();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xs(n), xn(n), err(n);
  rhs(t, x, k1);
  sol.states.push_back(x);
  sol.derivatives.push_back(k1);

  const double span = checkpoints.back() - checkpoints.front();
  double h = span > 0 ? std::min(span, 1e-3 * span) : 0.0;
  {
    // Initial step from the derivative scale.
    const double d0 = (x.array().abs() / (options.atol + options.rtol * x.array().abs()))
                          .matrix().norm() / std::sqrt(std::max<double>(1, n));
    const double d1 = (k1.array().abs() / (options.atol + options.rtol * x.array().abs()))
                          .matrix().norm() / std::sqrt(std::max<double>(1, n));
    if (d0 > 1e-5 && d1 > 1e-5) h = std::min(h, 0.01 * d0 / d1);
    h = std::max(h, 1e-12 * span);
  }
  const double min_step = 1e-15 * std::max(1.0, std::abs(checkpoints.back()));

  for (std::size_t target = 1; target < checkpoints.size(); ++target) {
    const double t_end = checkpoints[target];
    while (t < t_end) {
      if (sol.accepted_steps + sol.rejected_steps >= options.max_steps) {
        throw NumericalError("ODE integrator exhausted its step budget");
      }
      bool last = false;
      double step = h;
      if (t + step >= t_end || t_end - (t + step) < min_step) {
        step = t_end - t;
        last = true;
      }
      xs = x + step * a21 * k1;
      rhs(t + c2 * step, xs, k2);
      xs = x + step * (a31 * k1 + a32 * k2);
      rhs(t + c3 * step, xs, k3);
      xs = x + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * step, xs, k4);
      xs = x + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * step, xs, k5);
      xs = x + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + step, xs, k6);
      xn = x + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const double t_new = last ? t_end : t + step;
      rhs(t_new, xn, k7);
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const Eigen::ArrayXd scale =
          options.atol + options.rtol * x.array().abs().max(xn.array().abs());
      const double err_norm =
          n > 0 ? std::sqrt((err.array() / scale).square().mean()) : 0.0;

      if (err_norm <= 1.0) {
        t = t_new;
        x = xn;
        k1 = k7;
        ++sol.accepted_steps;
        const double factor = err_norm > 0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        if (!last) h = step * std::clamp(factor, 0.2, 5.0);
      } else {
        ++sol.rejected_steps;
        h = step * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 1.0);
        if (h < min_step) {
          throw NumericalError("ODE step size underflow at t = " + std::to_string(t));
        }
      }
    }
    sol.states.push_back(x);
    sol.derivatives.push_back(k1);
  }
  return sol;
}

}  // namespace netctl
