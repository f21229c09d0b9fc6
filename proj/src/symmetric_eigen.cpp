#include "netctl/symmetric_eigen.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "netctl/error.hpp"

namespace netctl {

template <typename Scalar>
SymmetricEigen<Scalar> jacobi_eigen(const MatrixX<Scalar>& w, int max_sweeps) {
  using std::abs;
  using std::sqrt;
  if (w.rows() != w.cols()) throw ConfigError("jacobi_eigen needs a square matrix");
  const Index n = w.rows();
  MatrixX<Scalar> a = (w + w.transpose()) / Scalar(2);
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar scale = a.norm();

  SymmetricEigen<Scalar> out;
  auto off_norm = [&] {
    Scalar sum(0);
    for (Index q = 1; q < n; ++q) {
      for (Index p = 0; p < q; ++p) sum += a(p, q) * a(p, q);
    }
    return sqrt(2 * sum);
  };

  Scalar off = off_norm();
  while (off > eps * scale) {
    if (out.sweeps == max_sweeps) {
      throw NumericalError("Jacobi eigensolver did not converge in " +
                           std::to_string(max_sweeps) + " sweeps; off-diagonal norm " +
                           to_decimal_string(off, 6));
    }
    ++out.sweeps;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == 0) continue;
        const Scalar app = a(p, p);
        const Scalar aqq = a(q, q);
        // Negligible relative to both diagonal entries: drop it.
        if (out.sweeps > 4 && abs(apq) * 100 * (1 / eps) < abs(app) &&
            abs(apq) * 100 * (1 / eps) < abs(aqq)) {
          a(p, q) = a(q, p) = Scalar(0);
          continue;
        }
        const Scalar theta = (aqq - app) / (2 * apq);
        Scalar t = 1 / (abs(theta) + sqrt(theta * theta + 1));
        if (theta < 0) t = -t;
        const Scalar c = 1 / sqrt(t * t + 1);
        const Scalar s = t * c;
        const Scalar tau = s / (1 + c);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = Scalar(0);
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = arp - s * (arq + tau * arp);
          a(r, q) = arq + s * (arp - tau * arq);
        }
        for (Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          a(p, r) = a(r, p);
          a(q, r) = a(r, q);
        }
        for (Index r = 0; r < n; ++r) {
          const Scalar vrp = v(r, p);
          const Scalar vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
    off = off_norm();
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

template <typename Scalar>
Scalar smallest_symmetric_eigenvalue(const MatrixX<Scalar>& w) {
  if (w.rows() == 1) return w(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(w, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("tridiagonal eigensolver did not converge");
  }
  return es.eigenvalues()(0);
}

template <typename Scalar>
std::pair<Scalar, VectorX<Scalar>> smallest_symmetric_eigenpair(const MatrixX<Scalar>& w) {
  const Index n = w.rows();
  const Scalar mu = smallest_symmetric_eigenvalue(w);
  if (n == 1) return {mu, VectorX<Scalar>::Ones(1)};
  // Shift just below mu_1 so the factorization stays regular.
  const Scalar delta = std::numeric_limits<Scalar>::epsilon() * 16 * w.norm();
  const MatrixX<Scalar> shifted = w - (mu - delta) * MatrixX<Scalar>::Identity(n, n);
  const Eigen::PartialPivLU<MatrixX<Scalar>> lu(shifted);
  VectorX<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(1) + Scalar(static_cast<double>(i)) / Scalar(n);
  v.normalize();
  for (int it = 0; it < 3; ++it) {
    v = lu.solve(v);
    v.normalize();
  }
  // Fix the sign so the largest-magnitude entry is positive.
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
  return {mu, v};
}

template <typename Scalar>
Scalar mean_eigen_residual(const MatrixX<Scalar>& w, const SymmetricEigen<Scalar>& eig) {
  const Index n = eig.values.size();
  if (n == 0) return Scalar(0);
  const MatrixX<Scalar> r = w * eig.vectors - eig.vectors * eig.values.asDiagonal();
  Scalar sum(0);
  for (Index k = 0; k < n; ++k) sum += r.col(k).norm();
  return sum / Scalar(static_cast<double>(n));
}

#define NETCTL_INSTANTIATE(S)                                                   \
  template SymmetricEigen<S> jacobi_eigen<S>(const MatrixX<S>&, int);           \
  template S smallest_symmetric_eigenvalue<S>(const MatrixX<S>&);               \
  template std::pair<S, VectorX<S>> smallest_symmetric_eigenpair<S>(const MatrixX<S>&); \
  template S mean_eigen_residual<S>(const MatrixX<S>&, const SymmetricEigen<S>&);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

}  // namespace netctl
