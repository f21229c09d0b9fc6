#include "netctl/min_energy.hpp"

#include <cmath>

#include "netctl/error.hpp"

namespace netctl {

void ControlProblem::validate() const {
  if (a.rows() != a.cols()) throw ConfigError("state matrix must be square");
  inputs.validate(n());
  targets.validate(n());
  if (x0.size() != n()) throw ConfigError("x0 must have n entries");
  if (yf.size() != p()) throw ConfigError("yf must have p entries");
  if (!(horizon.tf > horizon.t0)) throw ConfigError("time horizon must be positive");
}

ControlProblem make_problem(const Network& net, InputSet inputs, TargetSet targets,
                            Eigen::VectorXd x0, Eigen::VectorXd yf, Horizon horizon) {
  ControlProblem prob{net.adjacency(), std::move(inputs), std::move(targets),
                      std::move(x0),   std::move(yf),     horizon};
  prob.validate();
  return prob;
}

std::vector<double> uniform_grid(const Horizon& horizon, int points) {
  if (points < 2) throw ConfigError("a report grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double h = horizon.length() / (points - 1);
  for (int k = 0; k < points; ++k) grid[k] = horizon.t0 + k * h;
  grid.back() = horizon.tf;
  return grid;
}

ControlSignal make_signal(Index channels, std::function<Eigen::VectorXd(double)> evaluator,
                          const Horizon& horizon, int points) {
  ControlSignal signal;
  signal.channels = channels;
  signal.times = uniform_grid(horizon, points);
  signal.samples.resize(channels, points);
  for (int k = 0; k < points; ++k) signal.samples.col(k) = evaluator(signal.times[k]);
  signal.evaluator = std::move(evaluator);
  return signal;
}

template <typename Scalar>
VectorX<Scalar> ModalSignal<Scalar>::evaluate(const Scalar& t) const {
  using std::exp;
  ComplexVectorX<Scalar> modal(weights.size());
  const Scalar tau = tf - t;
  for (Index i = 0; i < weights.size(); ++i) modal(i) = weights(i) * exp(rates(i) * tau);
  return (mixing * modal).real();
}

template <typename Scalar>
ModalSignal<Scalar> modal_signal(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& g,
                                 const VectorX<Scalar>& z, double tf) {
  using Complex = std::complex<Scalar>;
  if (g.rows() != decomp.size() || z.size() != decomp.size()) {
    throw ConfigError("modal signal dimensions do not match the decomposition");
  }
  ModalSignal<Scalar> s;
  s.mixing = (decomp.inverse * g.cast<Complex>()).transpose();
  s.weights = decomp.vectors.transpose() * z.template cast<Complex>();
  s.rates = decomp.values;
  s.tf = Scalar(tf);
  return s;
}

template <typename Scalar>
ControlSignal to_control_signal(std::shared_ptr<const ModalSignal<Scalar>> modal,
                                const Horizon& horizon, int points) {
  const Index channels = modal->mixing.rows();
  auto evaluator = [modal](double t) -> Eigen::VectorXd {
    const VectorX<Scalar> u = modal->evaluate(Scalar(t));
    Eigen::VectorXd out(u.size());
    for (Index i = 0; i < u.size(); ++i) out(i) = to_double(u(i));
    return out;
  };
  return make_signal(channels, evaluator, horizon, points);
}

template <typename Scalar>
Maneuver<Scalar> maneuver(const ControlProblem& prob, const EigDecomp<Scalar>& decomp) {
  prob.validate();
  const VectorX<Scalar> free = propagate(decomp, VectorX<Scalar>(prob.x0.cast<Scalar>()),
                                         Scalar(prob.horizon.tf) - Scalar(prob.horizon.t0));
  Maneuver<Scalar> man;
  man.beta.resize(prob.p());
  for (Index i = 0; i < prob.p(); ++i) {
    man.beta(i) = Scalar(prob.yf(i)) - free(prob.targets.nodes[i]);
  }
  man.magnitude = man.beta.norm();
  return man;
}

template <typename Scalar>
VectorX<Scalar> apply_gramian_inverse(const SymmetricEigen<Scalar>& spec,
                                      const VectorX<Scalar>& beta,
                                      const PrecisionConfig& prec) {
  if (spec.values.size() != beta.size()) {
    throw ConfigError("maneuver and Gramian dimensions differ");
  }
  if (!(spec.values(0) > prec.zero_threshold<Scalar>())) {
    throw ControllabilityError("Gramian is singular at working precision; mu_1 = " +
                                   to_decimal_string(spec.values(0), 12),
                               to_decimal_string(spec.values(0), prec.digits));
  }
  const VectorX<Scalar> coeff = spec.vectors.transpose() * beta;
  return spec.vectors * coeff.cwiseQuotient(spec.values);
}

template <typename Scalar>
ControlSignal min_energy_input(const ControlProblem& prob, const Maneuver<Scalar>& man,
                               const SymmetricEigen<Scalar>& spec,
                               const EigDecomp<Scalar>& decomp, const PrecisionConfig& prec,
                               int points) {
  const VectorX<Scalar> z = apply_gramian_inverse(spec, man.beta, prec);
  VectorX<Scalar> ct_z = VectorX<Scalar>::Zero(prob.n());
  for (Index i = 0; i < prob.p(); ++i) ct_z(prob.targets.nodes[i]) = z(i);
  auto modal = std::make_shared<const ModalSignal<Scalar>>(
      modal_signal(decomp, prob.input_matrix(), ct_z, prob.horizon.tf));
  return to_control_signal<Scalar>(modal, prob.horizon, points);
}

template <typename Scalar>
Scalar energy_closed_form(const Maneuver<Scalar>& man, const SymmetricEigen<Scalar>& spec,
                          const PrecisionConfig& prec) {
  if (man.magnitude == 0) return Scalar(0);
  return man.beta.dot(apply_gramian_inverse(spec, man.beta, prec));
}

template <typename Scalar>
std::pair<Scalar, Scalar> energy_bounds(const Maneuver<Scalar>& man,
                                        const SymmetricEigen<Scalar>& spec) {
  const Scalar b2 = man.magnitude * man.magnitude;
  if (b2 == 0) return {Scalar(0), Scalar(0)};
  return {b2 / spec.values(spec.values.size() - 1), b2 / spec.values(0)};
}

Trajectory simulate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const Eigen::MatrixXd& c, const Eigen::VectorXd& x0,
                    const Horizon& horizon, const ControlSignal& u, int points,
                    const OdeOptions& options) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.rows() ||
      x0.size() != a.rows()) {
    throw ConfigError("simulate: inconsistent system dimensions");
  }
  if (u.channels != b.cols()) throw ConfigError("simulate: signal has wrong channel count");
  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx.noalias() = a * x;
    if (b.cols() > 0) dx.noalias() += b * u(t);
  };
  Trajectory traj;
  traj.times = uniform_grid(horizon, points);
  const OdeSolution sol = integrate_dopri5(rhs, x0, traj.times, options);
  traj.states.resize(a.rows(), points);
  for (int k = 0; k < points; ++k) traj.states.col(k) = sol.states[k];
  traj.outputs = c * traj.states;
  return traj;
}

Trajectory simulate(const ControlProblem& prob, const ControlSignal& u, int points,
                    const OdeOptions& options) {
  prob.validate();
  return simulate(prob.a, prob.input_matrix(), prob.output_matrix(), prob.x0, prob.horizon,
                  u, points, options);
}

double energy_quadrature(const ControlSignal& u, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * u(rule.point(i)).squaredNorm();
  }
  return rule.half_length() * sum;
}

double reach_error(const Trajectory& traj, const Eigen::VectorXd& yf) {
  return (traj.final_output() - yf).norm() / std::max(1.0, yf.norm());
}

#define NETCTL_INSTANTIATE(S)                                                                \
  template struct ModalSignal<S>;                                                            \
  template ModalSignal<S> modal_signal<S>(const EigDecomp<S>&, const Eigen::MatrixXd&,      \
                                          const VectorX<S>&, double);                       \
  template ControlSignal to_control_signal<S>(std::shared_ptr<const ModalSignal<S>>,        \
                                              const Horizon&, int);                         \
  template Maneuver<S> maneuver<S>(const ControlProblem&, const EigDecomp<S>&);             \
  template VectorX<S> apply_gramian_inverse<S>(const SymmetricEigen<S>&, const VectorX<S>&, \
                                               const PrecisionConfig&);                      \
  template ControlSignal min_energy_input<S>(const ControlProblem&, const Maneuver<S>&,      \
                                             const SymmetricEigen<S>&, const EigDecomp<S>&, \
                                             const PrecisionConfig&, int);                   \
  template S energy_closed_form<S>(const Maneuver<S>&, const SymmetricEigen<S>&,            \
                                   const PrecisionConfig&);                                  \
  template std::pair<S, S> energy_bounds<S>(const Maneuver<S>&, const SymmetricEigen<S>&);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

}  // namespace netctl
