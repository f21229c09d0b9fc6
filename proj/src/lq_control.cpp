#include "netctl/lq_control.hpp"

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "netctl/error.hpp"
#include "netctl/network.hpp"

namespace netctl {
namespace {

using Complex = std::complex<double>;

bool is_symmetric(const Eigen::MatrixXd& x) {
  return (x - x.transpose()).cwiseAbs().maxCoeff() <=
         1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Swaps diagonal entries k and k+1 of an upper-triangular T, updating the
// unitary factor U so that U T U^H is unchanged.
void swap_schur(Eigen::MatrixXcd& t, Eigen::MatrixXcd& u, Index k) {
  const Index n = t.rows();
  const Complex t11 = t(k, k);
  const Complex t22 = t(k + 1, k + 1);
  const Complex f = t(k, k + 1);
  const Complex g = t22 - t11;
  const double r = std::hypot(std::abs(f), std::abs(g));
  if (r == 0.0) return;
  double c;
  Complex s;
  if (std::abs(f) == 0.0) {
    c = 0.0;
    s = std::conj(g) / std::abs(g);
  } else {
    c = std::abs(f) / r;
    s = (f / std::abs(f)) * std::conj(g) / r;
  }
  for (Index j = k + 2; j < n; ++j) {
    const Complex x = t(k, j);
    const Complex y = t(k + 1, j);
    t(k, j) = c * x + s * y;
    t(k + 1, j) = c * y - std::conj(s) * x;
  }
  for (Index i = 0; i < k; ++i) {
    const Complex x = t(i, k);
    const Complex y = t(i, k + 1);
    t(i, k) = c * x + std::conj(s) * y;
    t(i, k + 1) = c * y - s * x;
  }
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
  for (Index i = 0; i < n; ++i) {
    const Complex x = u(i, k);
    const Complex y = u(i, k + 1);
    u(i, k) = c * x + std::conj(s) * y;
    u(i, k + 1) = c * y - s * x;
  }
}

template <typename Scalar>
Scalar frobenius(const MatrixX<Scalar>& x) {
  return x.norm();
}

template <typename Scalar>
MatrixX<Scalar> care_residual_matrix(const MatrixX<Scalar>& s, const MatrixX<Scalar>& a_bar,
                                     const MatrixX<Scalar>& k, const MatrixX<Scalar>& q_bar) {
  return s * k * s - s * a_bar - a_bar.transpose() * s - q_bar;
}

// X with A^T X + X A = -F, from A = V diag(l) V^{-1}.
template <typename Scalar>
MatrixX<Scalar> lyapunov_modal(const EigDecomp<Scalar>& decomp, const MatrixX<Scalar>& f) {
  using C = std::complex<Scalar>;
  const Index n = decomp.size();
  const ComplexMatrixX<Scalar> vt = decomp.vectors.transpose();
  ComplexMatrixX<Scalar> y = vt * f.template cast<C>() * decomp.vectors;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) y(i, j) = -y(i, j) / (decomp.values(i) + decomp.values(j));
  }
  const ComplexMatrixX<Scalar> vinv_t = decomp.inverse.transpose();
  const MatrixX<Scalar> x = (vinv_t * y * decomp.inverse).real();
  return (x + x.transpose()) / Scalar(2);
}

template <typename Scalar>
void require_hurwitz(const EigDecomp<Scalar>& decomp) {
  for (Index i = 0; i < decomp.size(); ++i) {
    if (!(decomp.values(i).real() < 0)) {
      throw SolverError("closed-loop matrix is not Hurwitz (eigenvalue with real part " +
                        to_decimal_string(decomp.values(i).real(), 6) + ")");
    }
  }
}

}  // namespace

QuadraticCost QuadraticCost::scaled_identity(Index n, Index m, double zeta) {
  if (!(zeta >= 0.0)) throw ConfigError("state weight zeta must be non-negative");
  return {zeta * Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, m),
          Eigen::MatrixXd::Identity(m, m)};
}

void QuadraticCost::validate(Index n, Index m) const {
  if (q.rows() != n || q.cols() != n) throw ConfigError("Q must be n x n");
  if (this->m.rows() != n || this->m.cols() != m) throw ConfigError("M must be n x m");
  if (r.rows() != m || r.cols() != m) throw ConfigError("R must be m x m");
  if (!is_symmetric(q)) throw ConfigError("Q must be symmetric");
  if (!is_symmetric(r)) throw ConfigError("R must be symmetric");
  if (min_symmetric_eigenvalue(q) < -1e-12 * std::max(1.0, q.norm())) {
    throw ConfigError("Q must be positive semidefinite");
  }
  if (m > 0 && !(min_symmetric_eigenvalue(r) > 0.0)) {
    throw ConfigError("R must be positive definite");
  }
}

BarMatrices bar_matrices(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const QuadraticCost& cost) {
  const Index n = a.rows();
  const Index m = b.cols();
  if (b.rows() != n) throw ConfigError("input matrix row count does not match n");
  cost.validate(n, m);
  BarMatrices out;
  const Eigen::MatrixXd r_sym = (cost.r + cost.r.transpose()) / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r_sym);
  out.r_inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
              es.eigenvectors().transpose();
  out.r_inv_sqrt = es.operatorInverseSqrt();
  out.r_inv_mt = out.r_inv * cost.m.transpose();
  out.a_bar = a - b * out.r_inv_mt;
  out.b_bar = b * out.r_inv_sqrt;
  out.q_bar = cost.q - cost.m * out.r_inv * cost.m.transpose();
  out.q_bar = (out.q_bar + out.q_bar.transpose()) / 2;
  if (min_symmetric_eigenvalue(out.q_bar) < -1e-12 * std::max(1.0, out.q_bar.norm())) {
    throw ConfigError("Q - M R^-1 M^T is not positive semidefinite");
  }
  return out;
}

double care_residual(const Eigen::MatrixXd& s, const BarMatrices& bars) {
  const Eigen::MatrixXd k = bars.b_bar * bars.b_bar.transpose();
  return care_residual_matrix<double>(s, bars.a_bar, k, bars.q_bar).norm();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f) {
  const Index n = a.rows();
  Eigen::ComplexSchur<Eigen::MatrixXcd> cs(a.cast<Complex>());
  if (cs.info() != Eigen::Success) throw SolverError("Schur decomposition failed");
  const Eigen::MatrixXcd& t = cs.matrixT();
  const Eigen::MatrixXcd& u = cs.matrixU();
  const Eigen::MatrixXcd g = -(u.adjoint() * f.cast<Complex>() * u);
  // T^H Y + Y T = G, solved entry by entry.
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      Complex rhs = g(i, j);
      for (Index k = 0; k < i; ++k) rhs -= std::conj(t(k, i)) * y(k, j);
      for (Index k = 0; k < j; ++k) rhs -= y(i, k) * t(k, j);
      const Complex d = std::conj(t(i, i)) + t(j, j);
      if (std::abs(d) == 0.0) throw SolverError("Lyapunov equation is singular");
      y(i, j) = rhs / d;
    }
  }
  const Eigen::MatrixXd x = (u * y * u.adjoint()).real();
  return (x + x.transpose()) / 2;
}

RiccatiSolution solve_care(const BarMatrices& bars) {
  const Index n = bars.a_bar.rows();
  const Eigen::MatrixXd k = bars.b_bar * bars.b_bar.transpose();
  RiccatiSolution out;
  out.bars = bars;

  if (bars.q_bar.isZero(0.0) && spectral_abscissa(bars.a_bar) < 0.0) {
    out.s = Eigen::MatrixXd::Zero(n, n);
    out.residual = 0.0;
    return out;
  }

  Eigen::MatrixXd h(2 * n, 2 * n);
  h << bars.a_bar, -k, -bars.q_bar, -bars.a_bar.transpose();
  Eigen::ComplexSchur<Eigen::MatrixXcd> cs(h.cast<Complex>());
  if (cs.info() != Eigen::Success) throw SolverError("Hamiltonian Schur decomposition failed");
  Eigen::MatrixXcd t = cs.matrixT();
  Eigen::MatrixXcd u = cs.matrixU();

  const double scale = std::max(h.norm(), 1.0);
  Index stable = 0;
  for (Index j = 0; j < 2 * n; ++j) {
    const double re = t(j, j).real();
    if (std::abs(re) <= 1e-12 * scale) {
      throw SolverError("Hamiltonian has eigenvalues on the imaginary axis; "
                        "no stabilizing solution");
    }
    if (re < 0.0) {
      for (Index k2 = j; k2 > stable; --k2) swap_schur(t, u, k2 - 1);
      ++stable;
    }
  }
  if (stable != n) {
    throw SolverError("Hamiltonian stable subspace has dimension " + std::to_string(stable) +
                      ", expected " + std::to_string(n));
  }
  const Eigen::MatrixXcd u1 = u.topLeftCorner(n, n);
  const Eigen::MatrixXcd u2 = u.bottomLeftCorner(n, n);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(u1).singularValues();
  if (!(sv(n - 1) > 1e-12 * sv(0))) {
    throw SolverError("stable invariant subspace basis is ill-conditioned");
  }
  Eigen::MatrixXd s = (u2 * u1.inverse()).real();
  s = (s + s.transpose()) / 2;

  // One Newton (Kleinman) step, kept only if it lowers the residual.
  double residual = care_residual(s, bars);
  if (spectral_abscissa(bars.a_bar - k * s) < 0.0) {
    const Eigen::MatrixXd next = solve_lyapunov(bars.a_bar - k * s, bars.q_bar + s * k * s);
    const double next_residual = care_residual(next, bars);
    if (next_residual < residual) {
      s = next;
      residual = next_residual;
    }
  }
  out.s = s;
  out.residual = residual / (1.0 + s.squaredNorm());
  if (!(spectral_abscissa(bars.a_bar - k * s) < 0.0)) {
    throw SolverError("Riccati solution is not stabilizing");
  }
  if (!(out.residual <= 1e-8)) {
    throw SolverError("Riccati residual " + std::to_string(out.residual) +
                      " exceeds 1e-8 (1 + |S|^2)");
  }
  return out;
}

template <typename Scalar>
ClosedLoop<Scalar> closed_loop(const Eigen::MatrixXd& b, const RiccatiSolution& care,
                               const PrecisionConfig& prec) {
  const BarMatrices& bars = care.bars;
  const MatrixX<Scalar> a_bar = bars.a_bar.cast<Scalar>();
  const MatrixX<Scalar> b_bar = bars.b_bar.cast<Scalar>();
  const MatrixX<Scalar> k = b_bar * b_bar.transpose();
  const MatrixX<Scalar> q_bar = bars.q_bar.cast<Scalar>();

  ClosedLoop<Scalar> out;
  out.b = b;
  out.b_bar = bars.b_bar;
  out.b_r_inv = b * bars.r_inv;
  out.s = care.s.cast<Scalar>();
  const bool zero_solution = care.s.isZero(0.0);
  const Scalar tol = prec.residual_tolerance<Scalar>();
  constexpr int kMaxNewtonSteps = 8;
  for (int step = 0;; ++step) {
    out.a_tilde = a_bar - k * out.s;
    out.decomp = eig_decompose_scalar<Scalar>(out.a_tilde, prec);
    require_hurwitz(out.decomp);
    const Scalar residual = zero_solution ? Scalar(0)
                                          : frobenius<Scalar>(care_residual_matrix<Scalar>(
                                                out.s, a_bar, k, q_bar)) /
                                                (1 + out.s.squaredNorm());
    out.residual = to_double(residual);
    out.newton_steps = step;
    if (residual <= tol || step == kMaxNewtonSteps) {
      if (!(out.residual <= 1e-8)) {
        throw NumericalError("Riccati refinement stalled at relative residual " +
                             to_decimal_string(residual, 6));
      }
      break;
    }
    out.s = lyapunov_modal(out.decomp, MatrixX<Scalar>(q_bar + out.s * k * out.s));
  }
  const MatrixX<Scalar> r_inv = bars.r_inv.cast<Scalar>();
  const MatrixX<Scalar> b_s = b.cast<Scalar>();
  out.gain = bars.r_inv_mt.cast<Scalar>() + r_inv * (b_s.transpose() * out.s);
  return out;
}

template <typename Scalar>
TildeSystem<Scalar> tilde_system(const ControlProblem& prob, const ClosedLoop<Scalar>& loop,
                                 const PrecisionConfig& prec) {
  prob.validate();
  TildeSystem<Scalar> out;
  out.w_tilde = compute_gramian(loop.decomp, loop.b_bar, prob.targets, prob.horizon, prec);
  out.spectrum = spectrum(out.w_tilde);
  const VectorX<Scalar> free = propagate(loop.decomp, VectorX<Scalar>(prob.x0.cast<Scalar>()),
                                         Scalar(prob.horizon.tf) - Scalar(prob.horizon.t0));
  out.beta_tilde.resize(prob.p());
  for (Index i = 0; i < prob.p(); ++i) {
    out.beta_tilde(i) = Scalar(prob.yf(i)) - free(prob.targets.nodes[i]);
  }
  return out;
}

template <typename Scalar>
LqTrajectory lq_optimal_input(const ControlProblem& prob, const ClosedLoop<Scalar>& loop,
                              const TildeSystem<Scalar>& tilde, const PrecisionConfig& prec,
                              int points, const OdeOptions& options) {
  prob.validate();
  const VectorX<Scalar> z = apply_gramian_inverse(tilde.spectrum, tilde.beta_tilde, prec);
  VectorX<Scalar> ct_z = VectorX<Scalar>::Zero(prob.n());
  for (Index i = 0; i < prob.p(); ++i) ct_z(prob.targets.nodes[i]) = z(i);
  const auto feedforward = std::make_shared<const ModalSignal<Scalar>>(
      modal_signal(loop.decomp, loop.b_r_inv, ct_z, prob.horizon.tf));
  const Eigen::MatrixXd gain =
      loop.gain.unaryExpr([](const Scalar& x) { return to_double(x); });
  const Eigen::MatrixXd b = prob.input_matrix();
  auto u2 = [feedforward](double t) -> Eigen::VectorXd {
    return feedforward->evaluate(Scalar(t)).unaryExpr([](const Scalar& x) {
      return to_double(x);
    });
  };

  const OdeRhs rhs = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx.noalias() = prob.a * x;
    if (b.cols() > 0) dx.noalias() += b * (u2(t) - gain * x);
  };
  LqTrajectory out;
  out.trajectory.times = uniform_grid(prob.horizon, points);
  auto sol = std::make_shared<const OdeSolution>(
      integrate_dopri5(rhs, prob.x0, out.trajectory.times, options));
  out.trajectory.states.resize(prob.n(), points);
  for (int k = 0; k < points; ++k) out.trajectory.states.col(k) = sol->states[k];
  out.trajectory.outputs = prob.output_matrix() * out.trajectory.states;

  auto evaluator = [sol, gain, u2](double t) -> Eigen::VectorXd {
    return u2(t) - gain * sol->state_at(t);
  };
  out.signal = make_signal(prob.m(), evaluator, prob.horizon, points);
  return out;
}

template <typename Scalar>
LqEnergy<Scalar> lq_energy(const ClosedLoop<Scalar>& loop, const TargetSet& targets,
                           const VectorX<Scalar>& beta_tilde, const VectorX<Scalar>& z,
                           const Eigen::VectorXd& x0, const QuadratureRule& rule) {
  using C = std::complex<Scalar>;
  using std::exp;
  const Index n = loop.decomp.size();
  const auto& v = loop.decomp.vectors;
  const auto& vinv = loop.decomp.inverse;
  const auto& lambda = loop.decomp.values;

  VectorX<Scalar> ct_z = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < targets.size(); ++i) ct_z(targets.nodes[i]) = z(i);
  const ComplexVectorX<Scalar> w = v.transpose() * ct_z.template cast<C>();

  // P = (V^{-1} Bb)(V^{-1} Bb)^T / (l_i + l_j)
  const ComplexMatrixX<Scalar> gb = vinv * loop.b_bar.template cast<C>();
  ComplexMatrixX<Scalar> p = gb * gb.transpose();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) p(i, j) /= lambda(i) + lambda(j);
  }
  const Scalar t0(rule.t0);
  const Scalar tf(rule.tf);
  ComplexVectorX<Scalar> bw(n);
  for (Index j = 0; j < n; ++j) bw(j) = exp(lambda(j) * (tf - t0)) * w(j);
  const ComplexVectorX<Scalar> r =
      vinv * x0.cast<Scalar>().template cast<C>() + p * bw;

  const ComplexMatrixX<Scalar> fv = loop.gain.template cast<C>() * v;  // m x n
  const ComplexMatrixX<Scalar> fvp = fv * p;
  const ComplexMatrixX<Scalar> mix = loop.b_r_inv.template cast<C>().transpose() * vinv.transpose();

  Scalar uu1(0), u1u2(0), uu2(0);
  ComplexVectorX<Scalar> ar(n), cw(n);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const Scalar t(rule.point(q));
    for (Index i = 0; i < n; ++i) {
      ar(i) = exp(lambda(i) * (t - t0)) * r(i);
      cw(i) = exp(lambda(i) * (tf - t)) * w(i);
    }
    const VectorX<Scalar> u1 = -(fv * ar - fvp * cw).real();
    const VectorX<Scalar> u2 = (mix * cw).real();
    const Scalar wq(rule.weights[q]);
    uu1 += wq * u1.squaredNorm();
    u1u2 += wq * u1.dot(u2);
    uu2 += wq * u2.squaredNorm();
  }
  const Scalar half(rule.half_length());
  LqEnergy<Scalar> out;
  out.state_terms = half * (uu1 + 2 * u1u2);
  out.feedforward = half * uu2;
  out.total = out.state_terms + out.feedforward;
  out.quadratic_form = beta_tilde.dot(z);
  return out;
}

template <typename Scalar>
LqEnergy<Scalar> lq_energy(const ControlProblem& prob, const ClosedLoop<Scalar>& loop,
                           const TildeSystem<Scalar>& tilde, const QuadratureRule& rule,
                           const PrecisionConfig& prec) {
  const VectorX<Scalar> z = apply_gramian_inverse(tilde.spectrum, tilde.beta_tilde, prec);
  return lq_energy(loop, prob.targets, tilde.beta_tilde, z, prob.x0, rule);
}

#define NETCTL_INSTANTIATE(S)                                                                 \
  template ClosedLoop<S> closed_loop<S>(const Eigen::MatrixXd&, const RiccatiSolution&,       \
                                        const PrecisionConfig&);                              \
  template TildeSystem<S> tilde_system<S>(const ControlProblem&, const ClosedLoop<S>&,        \
                                          const PrecisionConfig&);                            \
  template LqTrajectory lq_optimal_input<S>(const ControlProblem&, const ClosedLoop<S>&,      \
                                            const TildeSystem<S>&, const PrecisionConfig&,    \
                                            int, const OdeOptions&);                          \
  template LqEnergy<S> lq_energy<S>(const ClosedLoop<S>&, const TargetSet&, const VectorX<S>&, \
                                    const VectorX<S>&, const Eigen::VectorXd&,                \
                                    const QuadratureRule&);                                   \
  template LqEnergy<S> lq_energy<S>(const ControlProblem&, const ClosedLoop<S>&,              \
                                    const TildeSystem<S>&, const QuadratureRule&,             \
                                    const PrecisionConfig&);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

}  // namespace netctl
