#include "netctl/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "netctl/control_config.hpp"
#include "netctl/error.hpp"
#include "netctl/network.hpp"
#include "netctl/quadrature.hpp"
#include "test_util.hpp"

namespace netctl {
namespace {

using test::network_from_matrix;

const PrecisionConfig kPrec100{100};
const PrecisionConfig kPrec50{50};

// Direct quadrature of the defining integral with the Pade matrix
// exponential, independent of the eigendecomposition route.
Eigen::MatrixXd gramian_by_quadrature(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                      double tf) {
  const QuadratureRule rule = gauss_legendre(60, 0.0, tf);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(a.rows(), a.rows());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Eigen::MatrixXd e = (a * (tf - rule.point(i))).exp();
    w += rule.weights[i] * e * b * b.transpose() * e.transpose();
  }
  return rule.half_length() * w;
}

Eigen::MatrixXd random_spd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = g(rng);
  }
  return x * x.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

template <typename Scalar>
Gramian<Scalar> gramian_of(const MatrixX<Scalar>& w) {
  std::vector<Index> nodes(static_cast<std::size_t>(w.rows()));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  return {w, nodes, Horizon{}, 100};
}

TEST(EigDecomposeTest, DiagonalMatrix) {
  const Eigen::Vector3d d(-1.0, -2.5, -4.0);
  const auto decomp = eig_decompose<Float100>(Eigen::MatrixXd(d.asDiagonal()), kPrec100);
  for (Index i = 0; i < 3; ++i) {
    bool found = false;
    for (Index j = 0; j < 3; ++j) {
      if (std::abs(to_double(decomp.values(j).real()) - d(i)) < 1e-14) found = true;
    }
    EXPECT_TRUE(found);
  }
  EXPECT_LT(decomp.refined_offdiag, 1e-90);
}

TEST(EigDecomposeTest, UpperTriangularTwoByTwo) {
  Eigen::MatrixXd a(2, 2);
  a << -1, 1, 0, -2;
  const auto decomp = eig_decompose<double>(a, PrecisionConfig{16});
  for (Index k = 0; k < 2; ++k) {
    const Eigen::Vector2cd v = decomp.vectors.col(k);
    const std::complex<double> l = decomp.values(k);
    if (std::abs(l - (-1.0)) < 1e-12) {
      EXPECT_NEAR(std::abs(v(1)), 0.0, 1e-12);
    } else {
      EXPECT_NEAR(std::abs(l - (-2.0)), 0.0, 1e-12);
      // Proportional to (-1, 1).
      EXPECT_NEAR(std::abs(v(0) + v(1)), 0.0, 1e-12);
    }
  }
}

TEST(EigDecomposeTest, RandomNetworkResidual) {
  const Network net = make_static_network(30, 2.5, 2.5, 3.0, 11);
  const auto decomp = eig_decompose<Float50>(net.adjacency(), kPrec50);
  EXPECT_LE(decomp.residual, 1e-8);
  const MatrixX<Float50> a = net.adjacency().cast<Float50>();
  const ComplexMatrixX<Float50> r =
      a.cast<std::complex<Float50>>() * decomp.vectors -
      decomp.vectors * decomp.values.asDiagonal();
  EXPECT_LT(to_double(r.cwiseAbs().maxCoeff()), 1e-40);
}

TEST(ComputeYTest, ScalarEntry) {
  const auto decomp = eig_decompose<double>(Eigen::MatrixXd::Constant(1, 1, -1.0),
                                            PrecisionConfig{16});
  const auto y = compute_Y(decomp, Horizon{0.0, 1.0}, PrecisionConfig{16});
  EXPECT_NEAR(y(0, 0).real(), 0.43233235838169365, 1e-15);
  EXPECT_THROW(compute_Y(decomp, Horizon{1.0, 1.0}, PrecisionConfig{16}), ConfigError);
}

TEST(ComputeYTest, SymmetricAndVanishingForShortHorizon) {
  const Network net = make_static_network(10, 3.0, 3.0, 2.0, 5);
  const auto decomp = eig_decompose<double>(net.adjacency(), PrecisionConfig{16});
  const auto y = compute_Y(decomp, Horizon{0.0, 0.7}, PrecisionConfig{16});
  EXPECT_LT((y - y.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  const auto tiny = compute_Y(decomp, Horizon{0.0, 1e-12}, PrecisionConfig{16});
  EXPECT_LT(tiny.cwiseAbs().maxCoeff(), 1e-11);
}

TEST(ComputeGramianTest, ScalarClosedForm) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const auto decomp = eig_decompose<Float100>(-one, kPrec100);
  const auto gram = compute_gramian(decomp, one, one, Horizon{0.0, 1.0}, kPrec100);
  using std::exp;
  const Float100 expected = (Float100(1) - exp(Float100(-2))) / 2;
  EXPECT_LT(test::relative_error(gram.matrix(0, 0), expected), 1e-95);
  const auto e = worst_case_energy(gram, kPrec100);
  EXPECT_NEAR(to_double(e.energy), 2.3130352854993315, 1e-14);
}

TEST(ComputeGramianTest, ZeroInputGivesZeroGramian) {
  const Network net = make_static_network(8, 3.0, 3.0, 2.0, 3);
  const auto decomp = eig_decompose<double>(net.adjacency(), PrecisionConfig{16});
  const auto gram = compute_gramian(decomp, Eigen::MatrixXd::Zero(8, 2),
                                    Eigen::MatrixXd::Identity(8, 8), Horizon{}, PrecisionConfig{16});
  EXPECT_EQ(gram.matrix.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ComputeGramianTest, VersorRowsGivePrincipalSubmatrix) {
  const Network net = make_static_network(12, 2.5, 2.5, 2.5, 21);
  const InputSet inputs = select_drivers(net, 6, 4);
  const Eigen::MatrixXd b = build_input_matrix(inputs, net.n);
  const auto decomp = eig_decompose<Float50>(net.adjacency(), kPrec50);
  const auto full = compute_full_gramian(decomp, b, Horizon{}, kPrec50);
  const TargetSet targets{{1, 4, 7, 10}};
  const auto via_c =
      compute_gramian(decomp, b, build_output_matrix(targets, net.n), Horizon{}, kPrec50);
  const auto via_set = compute_gramian(decomp, b, targets, Horizon{}, kPrec50);
  const auto reduced = reduce(full, targets);
  EXPECT_LT(to_double((via_c.matrix - reduced.matrix).cwiseAbs().maxCoeff()), 1e-40);
  EXPECT_LT(to_double((via_set.matrix - reduced.matrix).cwiseAbs().maxCoeff()), 1e-40);
}

TEST(ComputeGramianTest, MatchesDirectQuadrature) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Network net = make_static_network(6 + static_cast<Index>(seed % 3), 3.0, 3.0, 2.0, seed);
    const InputSet inputs = select_drivers(net, 3, seed);
    const Eigen::MatrixXd b = build_input_matrix(inputs, net.n);
    const auto decomp = eig_decompose<Float50>(net.adjacency(), kPrec50);
    const auto gram = compute_full_gramian(decomp, b, Horizon{0.0, 1.0}, kPrec50);
    const Eigen::MatrixXd w = gram.matrix.unaryExpr([](const Float50& x) { return to_double(x); });
    const Eigen::MatrixXd oracle = gramian_by_quadrature(net.adjacency(), b, 1.0);
    EXPECT_LT((w - oracle).norm() / oracle.norm(), 1e-10) << "seed " << seed;
  }
}

TEST(ComputeGramianTest, DisconnectedTargetIsExactlyZero) {
  // Component {0, 1} is driven; node 2 is isolated.
  Eigen::MatrixXd a(3, 3);
  a << -1.0, 0.0, 0.0, 1.0, -2.0, 0.0, 0.0, 0.0, -3.0;
  const Network net = network_from_matrix(a);
  const auto report =
      output_controllability_check(net, InputSet{{0}}, TargetSet{{2}}, Horizon{}, kPrec100);
  EXPECT_FALSE(report.controllable);
  EXPECT_LT(std::abs(report.mu1), 1e-90);
  const auto chain =
      output_controllability_check(net, InputSet{{0}}, TargetSet{{0, 1}}, Horizon{}, kPrec100);
  EXPECT_TRUE(chain.controllable);
}

TEST(SpectrumTest, SmallExamples) {
  MatrixX<Float100> w(2, 2);
  w << 2, 0, 0, 1;
  auto eig = spectrum(gramian_of(w));
  EXPECT_EQ(eig.values(0), Float100(1));
  EXPECT_EQ(eig.values(1), Float100(2));
  EXPECT_EQ(abs(eig.vectors(1, 0)), Float100(1));
  w << 2, 1, 1, 2;
  eig = spectrum(gramian_of(w));
  EXPECT_LT(to_double(abs(eig.values(0) - 1)), 1e-98);
  EXPECT_LT(to_double(abs(eig.values(1) - 3)), 1e-98);
}

TEST(SpectrumTest, ResidualOnRandomSpd) {
  std::mt19937_64 rng(3);
  const MatrixX<Float100> w = random_spd(20, rng).cast<Float100>();
  const auto eig = jacobi_eigen(w);
  EXPECT_LE(mean_eigen_residual(w, eig), pow10<Float100>(-90));
  EXPECT_LT(to_double(abs(smallest_symmetric_eigenvalue(w) - eig.values(0))), 1e-90);
  const auto [mu, v] = smallest_symmetric_eigenpair(w);
  EXPECT_LT(to_double((w * v - mu * v).norm()), 1e-85);
}

TEST(WorstCaseEnergyTest, InverseOfSmallestEigenvalue) {
  EXPECT_EQ(worst_case_energy(0.5, PrecisionConfig{16}).energy, 2.0);
  EXPECT_THROW(worst_case_energy(Float100(1e-60), kPrec100), ControllabilityError);
}

TEST(ReduceTest, SubmatrixSelection) {
  MatrixX<double> d = Eigen::Vector3d(1, 2, 3).asDiagonal();
  const auto gram = gramian_of(d);
  const auto kept = reduce(gram, TargetSet{{1, 2}});
  EXPECT_EQ(kept.matrix, (Eigen::Matrix2d() << 2, 0, 0, 3).finished());
  EXPECT_EQ(reduce(gram, TargetSet{{0, 1, 2}}).matrix, gram.matrix);
  EXPECT_EQ(reduce(kept, TargetSet{{2}}).matrix, reduce(gram, TargetSet{{2}}).matrix);
  EXPECT_THROW(reduce(kept, TargetSet{{0}}), ConfigError);
}

TEST(EtaStepTest, DiagonalCases) {
  MatrixX<double> d = Eigen::Vector2d(1, 2).asDiagonal();
  const auto parent = gramian_of(d);
  EXPECT_EQ(eta_step(parent, reduce(parent, TargetSet{{1}}), PrecisionConfig{16}), 2.0);
  EXPECT_EQ(eta_step(parent, reduce(parent, TargetSet{{0}}), PrecisionConfig{16}), 1.0);
}

TEST(EtaStepTest, RandomSpdRatiosAtLeastOne) {
  std::mt19937_64 rng(8);
  const auto parent = gramian_of<Float50>(random_spd(5, rng).cast<Float50>());
  for (Index drop = 0; drop < 5; ++drop) {
    TargetSet keep;
    for (Index i = 0; i < 5; ++i) {
      if (i != drop) keep.nodes.push_back(i);
    }
    EXPECT_GE(eta_step(parent, reduce(parent, keep), kPrec50), Float50(1));
  }
}

TEST(InterlacingTest, DiagonalAndRandomChains) {
  MatrixX<Float100> d = Eigen::Vector4d(4, 1, 3, 2).asDiagonal().toDenseMatrix().cast<Float100>();
  const auto full = gramian_of(d);
  std::vector<Gramian<Float100>> chain;
  for (const auto& set : sample_nested_chain(4, 1)) chain.push_back(reduce(full, set));
  auto report = interlacing_audit(chain, kPrec100);
  EXPECT_EQ(report.violations, 0u);
  EXPECT_TRUE(report.emax_non_decreasing);

  std::mt19937_64 rng(2);
  const auto random_full = gramian_of<Float100>(random_spd(10, rng).cast<Float100>());
  chain.clear();
  for (const auto& set : sample_nested_chain(10, 9)) chain.push_back(reduce(random_full, set));
  report = interlacing_audit(chain, kPrec100);
  EXPECT_EQ(report.violations, 0u);
  EXPECT_EQ(report.comparisons, 90u);
  EXPECT_LE(report.max_violation, 1e-88);
}

TEST(InterlacingTest, RandomSubsetsNeverLowerMuOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto full = gramian_of<double>(random_spd(7, rng));
    const Index p = 1 + static_cast<Index>(trial % 7);
    const TargetSet keep = sample_target_set(7, p, static_cast<std::uint64_t>(trial));
    EXPECT_GE(smallest_eigenvalue(reduce(full, keep)), smallest_eigenvalue(full) - 1e-12);
  }
}

TEST(SpectrumCsvTest, Format) {
  SymmetricEigen<double> eig;
  eig.values = Eigen::Vector2d(0.25, 4.0);
  EXPECT_EQ(spectrum_csv(eig, 3), "index,eigenvalue\n1,2.50e-01\n2,4.00e+00\n");
}

}  // namespace
}  // namespace netctl
