#include "netctl/eigen_decomposition.hpp"

#include <string>
#include <type_traits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "netctl/error.hpp"

namespace netctl {
namespace {

template <typename Scalar>
ComplexMatrixX<Scalar> real_times_complex(const MatrixX<Scalar>& a,
                                          const ComplexMatrixX<Scalar>& z) {
  const MatrixX<Scalar> re = a * z.real();
  const MatrixX<Scalar> im = a * z.imag();
  ComplexMatrixX<Scalar> out(re.rows(), re.cols());
  for (Index j = 0; j < re.cols(); ++j) {
    for (Index i = 0; i < re.rows(); ++i) out(i, j) = std::complex<Scalar>(re(i, j), im(i, j));
  }
  return out;
}

template <typename Scalar>
Scalar max_offdiag(const ComplexMatrixX<Scalar>& t) {
  using std::abs;
  Scalar worst(0);
  for (Index j = 0; j < t.cols(); ++j) {
    for (Index i = 0; i < t.rows(); ++i) {
      if (i != j) worst = std::max<Scalar>(worst, abs(t(i, j)));
    }
  }
  return worst;
}

template <typename Scalar>
EigDecomp<Scalar> decompose(const Eigen::MatrixXd& a, const MatrixX<Scalar>& a_s,
                            const PrecisionConfig& prec) {
  using std::abs;
  if (a.rows() != a.cols()) throw ConfigError("state matrix must be square");
  const Index n = a.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the state matrix failed to converge");
  }
  const Eigen::MatrixXcd v0 = es.eigenvectors();
  const Eigen::VectorXcd l0 = es.eigenvalues();
  const double a_norm = std::max(a.norm(), 1e-300);

  EigDecomp<Scalar> out;
  out.residual =
      (a.cast<std::complex<double>>() * v0 - v0 * l0.asDiagonal()).colwise().norm().maxCoeff() /
      a_norm;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(v0).singularValues();
  out.condition = sv(n - 1) > 0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition < kMaxEigenvectorCondition)) {
    throw NumericalError("eigenvector matrix is near-defective (condition " +
                         std::to_string(out.condition) +
                         "); re-draw the diagonal noise");
  }
  if (!(out.residual <= 1e-8)) {
    throw NumericalError("eigendecomposition residual " + std::to_string(out.residual) +
                         " exceeds 1e-8 |A|");
  }

  ComplexMatrixX<Scalar> v = v0.cast<std::complex<Scalar>>();
  out.values = l0.cast<std::complex<Scalar>>();
  if constexpr (std::is_same_v<Scalar, double>) {
    out.vectors = v;
    out.inverse = v.partialPivLu().inverse();
    out.refined_offdiag = out.residual;
    return out;
  } else {
    // Rounding in V^{-1} A V grows with cond(V), so the target does too.
    const Scalar target = pow10<Scalar>(-scalar_digits10<Scalar>() + 2) *
                          Scalar(std::min(std::max(out.condition, 1.0), 1e6)) * Scalar(a_norm);
    const Scalar gap_floor = prec.zero_threshold<Scalar>() * Scalar(a_norm);
    constexpr int kMaxSteps = 12;
    Scalar previous = std::numeric_limits<Scalar>::infinity();
    for (int step = 0;; ++step) {
      ComplexMatrixX<Scalar> inv = v.partialPivLu().inverse();
      const ComplexMatrixX<Scalar> t = inv * real_times_complex(a_s, v);
      const Scalar off = max_offdiag(t);
      out.values = t.diagonal();
      if (off <= target || step == kMaxSteps || off > previous / 2) {
        if (off > Scalar(1e-12) * Scalar(a_norm)) {
          throw NumericalError("eigenvector refinement stalled at relative off-diagonal " +
                               to_decimal_string(off / Scalar(a_norm), 6));
        }
        out.vectors = std::move(v);
        out.inverse = std::move(inv);
        out.refined_offdiag = to_double(off / Scalar(a_norm));
        out.refinement_steps = step;
        return out;
      }
      previous = off;
      ComplexMatrixX<Scalar> f = ComplexMatrixX<Scalar>::Zero(n, n);
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
          if (i == j) continue;
          const std::complex<Scalar> gap = out.values(j) - out.values(i);
          if (abs(gap) < gap_floor) {
            throw NumericalError("repeated eigenvalues; the state matrix may be defective");
          }
          f(i, j) = t(i, j) / gap;
        }
      }
      v += v * f;
      v.colwise().normalize();
    }
  }
}

}  // namespace

template <typename Scalar>
EigDecomp<Scalar> eig_decompose(const Eigen::MatrixXd& a, const PrecisionConfig& prec) {
  return decompose<Scalar>(a, a.cast<Scalar>(), prec);
}

template <typename Scalar>
EigDecomp<Scalar> eig_decompose_scalar(const MatrixX<Scalar>& a, const PrecisionConfig& prec) {
  const Eigen::MatrixXd a_d = a.unaryExpr([](const Scalar& x) { return to_double(x); });
  return decompose<Scalar>(a_d, a, prec);
}

template <typename Scalar>
VectorX<Scalar> propagate(const EigDecomp<Scalar>& decomp, const VectorX<Scalar>& x,
                          const Scalar& tau) {
  using std::exp;
  ComplexVectorX<Scalar> modal = decomp.inverse * x.template cast<std::complex<Scalar>>();
  for (Index i = 0; i < modal.size(); ++i) modal(i) *= exp(decomp.values(i) * tau);
  return (decomp.vectors * modal).real();
}

template <typename Scalar>
VectorX<Scalar> propagate_transpose(const EigDecomp<Scalar>& decomp,
                                    const VectorX<Scalar>& z, const Scalar& tau) {
  using std::exp;
  ComplexVectorX<Scalar> modal =
      decomp.vectors.transpose() * z.template cast<std::complex<Scalar>>();
  for (Index i = 0; i < modal.size(); ++i) modal(i) *= exp(decomp.values(i) * tau);
  return (decomp.inverse.transpose() * modal).real();
}

#define NETCTL_INSTANTIATE(S)                                                          \
  template EigDecomp<S> eig_decompose<S>(const Eigen::MatrixXd&, const PrecisionConfig&); \
  template EigDecomp<S> eig_decompose_scalar<S>(const MatrixX<S>&, const PrecisionConfig&); \
  template VectorX<S> propagate<S>(const EigDecomp<S>&, const VectorX<S>&, const S&);  \
  template VectorX<S> propagate_transpose<S>(const EigDecomp<S>&, const VectorX<S>&,   \
                                             const S&);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

}  // namespace netctl
