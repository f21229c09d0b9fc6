#include "netctl/gramian.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "netctl/error.hpp"

namespace netctl {
namespace {

/// W = Re(CV (Y o G G^T) (CV)^T) with G = V^{-1} B, symmetrized.
template <typename Scalar>
MatrixX<Scalar> assemble(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& b,
                         const ComplexMatrixX<Scalar>& cv, const Horizon& horizon,
                         const PrecisionConfig& prec) {
  using Complex = std::complex<Scalar>;
  const Index n = decomp.size();
  if (b.rows() != n) throw ConfigError("input matrix row count does not match n");
  if (cv.rows() == 0 || b.cols() == 0) {
    return MatrixX<Scalar>::Zero(cv.rows(), cv.rows());
  }
  const ComplexMatrixX<Scalar> g = decomp.inverse * b.cast<Complex>();
  const ComplexMatrixX<Scalar> h = compute_Y(decomp, horizon, prec).cwiseProduct(g * g.transpose());
  const ComplexMatrixX<Scalar> p = cv * h;
  const MatrixX<Scalar> cr = cv.real().transpose();
  const MatrixX<Scalar> ci = cv.imag().transpose();
  const MatrixX<Scalar> pr = p.real();
  const MatrixX<Scalar> pi = p.imag();
  MatrixX<Scalar> w = pr * cr - pi * ci;
  const MatrixX<Scalar> imag = pr * ci + pi * cr;

  using std::abs;
  const Scalar scale = std::max<Scalar>(w.cwiseAbs().maxCoeff(), Scalar(1));
  const Scalar residue = imag.cwiseAbs().maxCoeff();
  if (residue > prec.residual_tolerance<Scalar>() * scale) {
    throw NumericalError("Gramian imaginary residue " + to_decimal_string(residue, 6) +
                         " exceeds working tolerance");
  }
  return (w + w.transpose()) / Scalar(2);
}

std::vector<Index> iota_nodes(Index p) {
  std::vector<Index> nodes(static_cast<std::size_t>(p));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  return nodes;
}

}  // namespace

template <typename Scalar>
ComplexMatrixX<Scalar> compute_Y(const EigDecomp<Scalar>& decomp, const Horizon& horizon,
                                 const PrecisionConfig& prec) {
  using std::abs;
  using std::exp;
  if (!(horizon.tf > horizon.t0)) throw ConfigError("time horizon must be positive");
  const Index n = decomp.size();
  const Scalar h = Scalar(horizon.tf) - Scalar(horizon.t0);
  const Scalar floor = prec.zero_threshold<Scalar>();
  ComplexMatrixX<Scalar> y(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const std::complex<Scalar> s = decomp.values(i) + decomp.values(j);
      if (abs(s) < floor) {
        throw NumericalError("eigenvalue pair sums to zero; the state matrix is not Hurwitz");
      }
      y(i, j) = y(j, i) = (exp(s * h) - Scalar(1)) / s;
    }
  }
  return y;
}

template <typename Scalar>
Gramian<Scalar> compute_gramian(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& c, const Horizon& horizon,
                                const PrecisionConfig& prec) {
  if (c.cols() != decomp.size()) throw ConfigError("output matrix column count does not match n");
  const ComplexMatrixX<Scalar> cv = c.cast<std::complex<Scalar>>() * decomp.vectors;
  return {assemble(decomp, b, cv, horizon, prec), iota_nodes(c.rows()), horizon, prec.digits};
}

template <typename Scalar>
Gramian<Scalar> compute_gramian(const EigDecomp<Scalar>& decomp, const Eigen::MatrixXd& b,
                                const TargetSet& targets, const Horizon& horizon,
                                const PrecisionConfig& prec) {
  targets.validate(decomp.size());
  ComplexMatrixX<Scalar> cv(targets.size(), decomp.size());
  for (Index i = 0; i < targets.size(); ++i) cv.row(i) = decomp.vectors.row(targets.nodes[i]);
  return {assemble(decomp, b, cv, horizon, prec), targets.nodes, horizon, prec.digits};
}

template <typename Scalar>
Gramian<Scalar> compute_full_gramian(const EigDecomp<Scalar>& decomp,
                                     const Eigen::MatrixXd& b, const Horizon& horizon,
                                     const PrecisionConfig& prec) {
  return {assemble(decomp, b, decomp.vectors, horizon, prec), iota_nodes(decomp.size()),
          horizon, prec.digits};
}

template <typename Scalar>
SymmetricEigen<Scalar> spectrum(const Gramian<Scalar>& gram) {
  return jacobi_eigen(gram.matrix);
}

template <typename Scalar>
Scalar smallest_eigenvalue(const Gramian<Scalar>& gram) {
  if (gram.size() == 0) throw ConfigError("empty Gramian");
  return smallest_symmetric_eigenvalue(gram.matrix);
}

template <typename Scalar>
WorstCaseEnergy<Scalar> worst_case_energy(const Scalar& mu1, const PrecisionConfig& prec) {
  using std::log10;
  if (!(mu1 > prec.zero_threshold<Scalar>())) {
    throw ControllabilityError("smallest Gramian eigenvalue " + to_decimal_string(mu1, 12) +
                                   " is below 10^(-digits/2); not output controllable",
                               to_decimal_string(mu1, prec.digits));
  }
  const Scalar energy = Scalar(1) / mu1;
  return {energy, to_double(log10(energy))};
}

template <typename Scalar>
WorstCaseEnergy<Scalar> worst_case_energy(const Gramian<Scalar>& gram,
                                          const PrecisionConfig& prec) {
  return worst_case_energy(smallest_eigenvalue(gram), prec);
}

template <typename Scalar>
Gramian<Scalar> reduce(const Gramian<Scalar>& gram, const TargetSet& keep) {
  std::unordered_map<Index, Index> row_of;
  for (std::size_t i = 0; i < gram.nodes.size(); ++i) {
    row_of[gram.nodes[i]] = static_cast<Index>(i);
  }
  std::vector<Index> rows;
  rows.reserve(keep.nodes.size());
  for (Index v : keep.nodes) {
    const auto it = row_of.find(v);
    if (it == row_of.end()) {
      throw ConfigError("node " + std::to_string(v) + " is not among the Gramian's targets");
    }
    rows.push_back(it->second);
  }
  if (std::set<Index>(rows.begin(), rows.end()).size() != rows.size()) {
    throw ConfigError("reduction target set repeats a node");
  }
  Gramian<Scalar> out{MatrixX<Scalar>(keep.size(), keep.size()), keep.nodes, gram.horizon,
                      gram.digits};
  for (Index j = 0; j < keep.size(); ++j) {
    for (Index i = 0; i < keep.size(); ++i) out.matrix(i, j) = gram.matrix(rows[i], rows[j]);
  }
  return out;
}

template <typename Scalar>
Scalar eta_step(const Gramian<Scalar>& parent, const Gramian<Scalar>& child,
                const PrecisionConfig& prec) {
  if (child.size() >= parent.size()) {
    throw ConfigError("eta_step expects the child to have fewer targets than the parent");
  }
  // Validates the subset relation.
  reduce(parent, TargetSet{child.nodes});
  const Scalar mu_parent = smallest_eigenvalue(parent);
  const Scalar mu_child = smallest_eigenvalue(child);
  if (!(mu_parent > Scalar(0))) {
    throw ControllabilityError("parent Gramian is singular",
                               to_decimal_string(mu_parent, prec.digits));
  }
  if (mu_child < mu_parent - prec.interlacing_tolerance<Scalar>()) {
    throw NumericalError("eta step below one: mu_1 decreased from " +
                         to_decimal_string(mu_parent, 12) + " to " +
                         to_decimal_string(mu_child, 12));
  }
  return mu_child / mu_parent;
}

template <typename Scalar>
InterlacingReport interlacing_audit(const std::vector<Gramian<Scalar>>& chain,
                                    const PrecisionConfig& prec) {
  std::vector<const Gramian<Scalar>*> sorted;
  for (const auto& g : chain) sorted.push_back(&g);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->size() < b->size(); });
  std::vector<VectorX<Scalar>> spectra;
  spectra.reserve(sorted.size());
  for (const auto* g : sorted) spectra.push_back(spectrum(*g).values);

  const Scalar tol = prec.interlacing_tolerance<Scalar>();
  InterlacingReport report;
  Scalar worst(0);
  auto record = [&](const Scalar& amount) {
    ++report.comparisons;
    if (amount > worst) worst = amount;
    if (amount > tol) ++report.violations;
  };
  for (std::size_t s = 1; s < sorted.size(); ++s) {
    const auto& small = *sorted[s - 1];
    const auto& big = *sorted[s];
    if (big.size() != small.size() + 1) {
      throw ConfigError("interlacing chain sizes must increase by one");
    }
    reduce(big, TargetSet{small.nodes});
    const auto& mu_small = spectra[s - 1];
    const auto& mu_big = spectra[s];
    for (Index k = 0; k < small.size(); ++k) {
      record(mu_big(k) - mu_small(k));
      record(mu_small(k) - mu_big(k + 1));
    }
    if (mu_small(0) < mu_big(0) - tol) report.emax_non_decreasing = false;
  }
  report.max_violation = to_double(worst);
  return report;
}

template <typename Scalar>
std::string spectrum_csv(const SymmetricEigen<Scalar>& eig, int digits) {
  std::ostringstream out;
  out << "index,eigenvalue\n";
  for (Index k = 0; k < eig.values.size(); ++k) {
    out << (k + 1) << ',' << to_decimal_string(eig.values(k), digits) << '\n';
  }
  return out.str();
}

#define NETCTL_INSTANTIATE(S)                                                                 \
  template ComplexMatrixX<S> compute_Y<S>(const EigDecomp<S>&, const Horizon&,               \
                                          const PrecisionConfig&);                            \
  template Gramian<S> compute_gramian<S>(const EigDecomp<S>&, const Eigen::MatrixXd&,        \
                                         const Eigen::MatrixXd&, const Horizon&,             \
                                         const PrecisionConfig&);                             \
  template Gramian<S> compute_gramian<S>(const EigDecomp<S>&, const Eigen::MatrixXd&,        \
                                         const TargetSet&, const Horizon&,                   \
                                         const PrecisionConfig&);                             \
  template Gramian<S> compute_full_gramian<S>(const EigDecomp<S>&, const Eigen::MatrixXd&,   \
                                              const Horizon&, const PrecisionConfig&);        \
  template SymmetricEigen<S> spectrum<S>(const Gramian<S>&);                                 \
  template S smallest_eigenvalue<S>(const Gramian<S>&);                                      \
  template WorstCaseEnergy<S> worst_case_energy<S>(const S&, const PrecisionConfig&);        \
  template WorstCaseEnergy<S> worst_case_energy<S>(const Gramian<S>&, const PrecisionConfig&); \
  template Gramian<S> reduce<S>(const Gramian<S>&, const TargetSet&);                        \
  template S eta_step<S>(const Gramian<S>&, const Gramian<S>&, const PrecisionConfig&);      \
  template InterlacingReport interlacing_audit<S>(const std::vector<Gramian<S>>&,            \
                                                  const PrecisionConfig&);                    \
  template std::string spectrum_csv<S>(const SymmetricEigen<S>&, int);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

}  // namespace netctl
