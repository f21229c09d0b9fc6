#include "netctl/control_config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "netctl/error.hpp"
#include "test_util.hpp"

namespace netctl {
namespace {

using test::network_from_matrix;

Network from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) a(i, i) = -1.0 - 0.1 * static_cast<double>(i);
  for (const auto& [src, dst] : edges) a(dst, src) = 1.0;
  return network_from_matrix(a);
}

TEST(SelectDriversTest, ChainNeedsItsHead) {
  const Network net = from_edges(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(select_drivers(net, 1, 0).nodes, std::vector<Index>{0});
}

TEST(SelectDriversTest, IsolatedNodesAreRoots) {
  const Network net = from_edges(2, {});
  EXPECT_EQ(select_drivers(net, 2, 0).nodes, (std::vector<Index>{0, 1}));
  EXPECT_THROW(select_drivers(net, 1, 0), ConfigError);
}

TEST(SelectDriversTest, TwoCyclePicksOneMember) {
  const Network net = from_edges(2, {{0, 1}, {1, 0}});
  std::set<Index> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const InputSet d = select_drivers(net, 1, seed);
    ASSERT_EQ(d.size(), 1);
    seen.insert(d.nodes[0]);
  }
  EXPECT_EQ(seen, (std::set<Index>{0, 1}));
}

TEST(SelectDriversTest, AlwaysReachesEveryNode) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Network net = make_static_network(80, 2.3, 2.3, 1.5, seed);
    const Index roots = static_cast<Index>(root_components(net).size());
    const InputSet d = select_drivers(net, std::max<Index>(roots, 20), seed);
    EXPECT_TRUE(reaches_all(net, d.nodes));
    EXPECT_TRUE(std::is_sorted(d.nodes.begin(), d.nodes.end()));
    EXPECT_EQ(std::set<Index>(d.nodes.begin(), d.nodes.end()).size(), d.nodes.size());
  }
}

TEST(SccTest, CondensationRoots) {
  // {0,1} cycle feeding {2}; {3} isolated.
  const Network net = from_edges(4, {{0, 1}, {1, 0}, {1, 2}});
  const SccDecomposition scc = strongly_connected_components(net);
  EXPECT_EQ(scc.count, 3);
  EXPECT_EQ(scc.component[0], scc.component[1]);
  EXPECT_NE(scc.component[0], scc.component[2]);
  EXPECT_EQ(root_components(net).size(), 2u);
}

TEST(DriverCountTest, Fractions) {
  EXPECT_EQ(driver_count(20, 0.5), 10);
  EXPECT_EQ(driver_count(3, 0.01), 1);
  EXPECT_THROW(driver_count(10, 0.0), ConfigError);
  EXPECT_THROW(driver_count(10, 1.5), ConfigError);
}

TEST(VersorTest, InputMatrix) {
  const Eigen::MatrixXd b = build_input_matrix(InputSet{{2, 0}}, 3);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 2);
  expected(2, 0) = 1.0;
  expected(0, 1) = 1.0;
  EXPECT_EQ(b, expected);
  EXPECT_EQ(Eigen::MatrixXd(b.transpose() * b), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(build_input_matrix(InputSet{{1}}, 3), Eigen::MatrixXd(Eigen::VectorXd::Unit(3, 1)));
  EXPECT_THROW(build_input_matrix(InputSet{{3}}, 3), ConfigError);
  EXPECT_THROW(build_input_matrix(InputSet{{1, 1}}, 3), ConfigError);
}

TEST(VersorTest, OutputMatrix) {
  const Eigen::MatrixXd c = build_output_matrix(TargetSet{{3}}, 5);
  EXPECT_EQ(c, Eigen::MatrixXd(Eigen::RowVectorXd::Unit(5, 3)));
  const Eigen::MatrixXd full = build_output_matrix(TargetSet{{4, 0, 2, 1, 3}}, 5);
  EXPECT_EQ(Eigen::MatrixXd(full * full.transpose()), Eigen::MatrixXd::Identity(5, 5));
  EXPECT_EQ(Eigen::MatrixXd(full.transpose() * full), Eigen::MatrixXd::Identity(5, 5));
  EXPECT_THROW(build_output_matrix(TargetSet{{-1}}, 5), ConfigError);
}

TEST(SampleTargetSetTest, FullAndDeterministic) {
  const TargetSet all = sample_target_set(7, 7, 3);
  EXPECT_EQ(all.nodes, (std::vector<Index>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(sample_target_set(50, 12, 9).nodes, sample_target_set(50, 12, 9).nodes);
  EXPECT_THROW(sample_target_set(5, 0, 1), ConfigError);
  EXPECT_THROW(sample_target_set(5, 6, 1), ConfigError);
}

TEST(SampleTargetSetTest, SingletonsUniform) {
  const Index n = 10;
  const int draws = 10000;
  std::vector<int> counts(n, 0);
  for (int k = 0; k < draws; ++k) ++counts[sample_target_set(n, 1, k).nodes[0]];
  const double mean = static_cast<double>(draws) / n;
  const double sigma = std::sqrt(draws * (1.0 / n) * (1.0 - 1.0 / n));
  for (int c : counts) EXPECT_LT(std::abs(c - mean), 3.5 * sigma);
}

TEST(NestedChainTest, Nested) {
  const auto chain = sample_nested_chain(6, 4);
  ASSERT_EQ(chain.size(), 6u);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    EXPECT_EQ(chain[k].size(), static_cast<Index>(k + 1));
    if (k > 0) {
      const std::set<Index> small(chain[k - 1].nodes.begin(), chain[k - 1].nodes.end());
      const std::set<Index> big(chain[k].nodes.begin(), chain[k].nodes.end());
      EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
  }
  const std::set<Index> all(chain.back().nodes.begin(), chain.back().nodes.end());
  EXPECT_EQ(all.size(), 6u);
  const auto again = sample_nested_chain(6, 4);
  for (std::size_t k = 0; k < chain.size(); ++k) EXPECT_EQ(again[k].nodes, chain[k].nodes);
}

TEST(OutputControllabilityTest, Examples) {
  const PrecisionConfig prec{50};
  const Network chain = test::chain_network(3);
  EXPECT_TRUE(output_controllability_check(chain, InputSet{{0}}, TargetSet{{0, 1, 2}}, Horizon{},
                                           prec)
                  .controllable);

  const Network full = make_static_network(6, 3.0, 3.0, 1.5, 2);
  EXPECT_TRUE(output_controllability_check(full, InputSet{{0, 1, 2, 3, 4, 5}},
                                           TargetSet{{0, 1, 2, 3, 4, 5}}, Horizon{}, prec)
                  .controllable);

  const Network split = from_edges(4, {{0, 1}, {2, 3}});
  const ControllabilityReport r =
      output_controllability_check(split, InputSet{{0}}, TargetSet{{3}}, Horizon{}, prec);
  EXPECT_FALSE(r.controllable);
  EXPECT_EQ(r.mu1, 0.0);
}

}  // namespace
}  // namespace netctl
