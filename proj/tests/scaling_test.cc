#include "netctl/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <numeric>
#include <optional>
#include <set>

#include <gtest/gtest.h>

#include "netctl/error.hpp"
#include "test_util.hpp"

namespace netctl {
namespace {

const PrecisionConfig kPrec50{50};

template <typename Scalar>
Gramian<Scalar> diagonal_gramian(const std::vector<double>& w, int digits) {
  Gramian<Scalar> g;
  const Index n = static_cast<Index>(w.size());
  g.matrix = MatrixX<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    g.matrix(i, i) = Scalar(w[static_cast<std::size_t>(i)]);
    g.nodes.push_back(i);
  }
  g.digits = digits;
  return g;
}

EnergyTable synthetic_table(const std::vector<double>& fractions,
                            const std::function<double(double)>& log10_e) {
  EnergyTable t;
  t.n = 10;
  t.fractions = fractions;
  for (double f : fractions) {
    t.sizes.push_back(target_size(10, f));
    t.log10_energy.push_back({log10_e(f), log10_e(f)});
    t.failures.push_back(0);
  }
  return t;
}

TEST(FitLineTest, ExactLine) {
  const LineFit fit = fit_line({0.1, 0.5, 0.9}, {0.7, 3.5, 6.3});
  EXPECT_NEAR(fit.slope, 7.0, 1e-13);
  EXPECT_NEAR(fit.intercept, 0.0, 1e-13);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-13);
  EXPECT_THROW(fit_line({1.0, 1.0}, {0.0, 1.0}), ConfigError);
}

TEST(FitEtaTest, SyntheticSlopeInNaturalLog) {
  const ScalingResult r = fit_eta(
      synthetic_table(default_fractions(), [](double f) { return 7.0 * f / std::log(10.0); }));
  EXPECT_NEAR(r.eta, 7.0, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);
  EXPECT_EQ(r.fractions.size(), 10u);
}

TEST(FitEtaTest, ConstantTableAndTooFewFractions) {
  const ScalingResult r = fit_eta(synthetic_table(default_fractions(), [](double) { return 3.0; }));
  EXPECT_NEAR(r.eta, 0.0, 1e-12);
  EXPECT_EQ(r.r_squared, 1.0);
  EXPECT_NEAR(r.intercept, 3.0 * std::log(10.0), 1e-12);
  EXPECT_THROW(fit_eta(synthetic_table({1.0}, [](double) { return 1.0; })), ConfigError);
  EXPECT_THROW(fit_eta(synthetic_table({0.5, 1.0}, [](double) { return 1.0; })), ConfigError);
}

TEST(FitEtaTest, CsvAndJsonSchema) {
  const ScalingResult r =
      fit_eta(synthetic_table({0.2, 0.6, 1.0}, [](double f) { return 2.0 * f; }));
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "fraction,mean_log10_E,std_log10_E");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto j = r.to_json();
  EXPECT_TRUE(j.contains("eta"));
  EXPECT_TRUE(j.contains("r_squared"));
  EXPECT_TRUE(j.contains("log_convention"));
}

TEST(SamplingPlanTest, Validation) {
  SamplingPlan plan;
  EXPECT_NO_THROW(plan.validate());
  plan.fractions = {0.5, 0.3};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan.fractions = {0.0, 0.5};
  EXPECT_THROW(plan.validate(), ConfigError);
  plan = SamplingPlan{};
  plan.samples = 1;
  EXPECT_THROW(plan.validate(), ConfigError);
  EXPECT_EQ(target_size(100, 0.1), 10);
  EXPECT_EQ(target_size(7, 0.01), 1);
  EXPECT_EQ(target_size(7, 1.0), 7);
}

TEST(SampleEnergiesTest, FullFractionIsConstant) {
  const Network net = make_static_network(20, 2.5, 2.5, 2.5, 3);
  SamplingPlan plan;
  plan.fractions = {0.5, 1.0};
  plan.samples = 5;
  plan.seed = 4;
  const EnergyTable t = sample_energies(net, select_drivers(net, 10, 5), plan, Horizon{}, kPrec50);
  const auto& last = t.log10_energy.back();
  for (double v : last) EXPECT_EQ(v, last.front());
  EXPECT_EQ(t.sizes, (std::vector<Index>{10, 20}));
}

TEST(SampleEnergiesTest, DiagonalSingletons) {
  const std::vector<double> w = {0.5, 2.0, 8.0, 1e-3};
  const auto g = diagonal_gramian<Float50>(w, 50);
  SamplingPlan plan;
  plan.fractions = {0.25};
  plan.samples = 20;
  const EnergyTable t = sample_energies(g, plan, kPrec50);
  std::set<double> allowed;
  for (double x : w) allowed.insert(-std::log10(x));
  for (double v : t.log10_energy[0]) {
    EXPECT_TRUE(std::any_of(allowed.begin(), allowed.end(),
                            [v](double a) { return std::abs(a - v) < 1e-14; }))
        << v;
  }
}

TEST(SampleEnergiesTest, FailuresAreRecorded) {
  const auto g = diagonal_gramian<Float50>({1.0, 0.0, 1.0, 1.0}, 50);
  SamplingPlan plan;
  plan.fractions = {0.25, 1.0};
  plan.samples = 30;
  const EnergyTable t = sample_energies(g, plan, kPrec50);
  EXPECT_EQ(t.failures[1], 30u);
  EXPECT_GT(t.failures[0], 0u);
  EXPECT_LT(t.failures[0], 30u);
  EXPECT_TRUE(std::isnan(t.log10_energy[1][0]));
}

TEST(SampleEnergiesTest, DeterministicAcrossWorkerCounts) {
  const Network net = make_static_network(16, 2.5, 2.5, 2.5, 8);
  const InputSet inputs = select_drivers(net, 8, 9);
  SamplingPlan plan;
  plan.samples = 6;
  plan.seed = 10;
  plan.workers = 1;
  const EnergyTable a = sample_energies(net, inputs, plan, Horizon{}, kPrec50);
  plan.workers = 4;
  const EnergyTable b = sample_energies(net, inputs, plan, Horizon{}, kPrec50);
  EXPECT_EQ(a.log10_energy, b.log10_energy);
}

TEST(SampleEnergiesTest, ExhaustiveOracleAtEightNodes) {
  const Network net = make_static_network(8, 2.5, 2.5, 2.0, 21);
  const InputSet inputs = select_drivers(net, 4, 22);
  const auto decomp = eig_decompose<Float50>(net.adjacency(), kPrec50);
  const auto full =
      compute_full_gramian(decomp, build_input_matrix(inputs, 8), Horizon{}, kPrec50);

  // Exhaustive means over all C(8, p) subsets.
  std::vector<double> fractions, exhaustive_mean, exhaustive_std;
  for (Index p = 2; p <= 8; p += 2) {
    std::vector<double> values;
    for (unsigned mask = 0; mask < 256u; ++mask) {
      if (std::popcount(mask) != p) continue;
      TargetSet t;
      for (Index i = 0; i < 8; ++i) {
        if (mask & (1u << i)) t.nodes.push_back(i);
      }
      values.push_back(worst_case_energy(reduce(full, t), kPrec50).log10_energy);
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    fractions.push_back(static_cast<double>(p) / 8.0);
    exhaustive_mean.push_back(mean);
    exhaustive_std.push_back(std::sqrt(var / values.size()));
  }

  SamplingPlan plan;
  plan.fractions = fractions;
  plan.samples = 200;
  plan.seed = 23;
  const EnergyTable t = sample_energies(full, plan, kPrec50);
  const ScalingResult sampled = fit_eta(t);
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    const double tol = 4.0 * exhaustive_std[f] / std::sqrt(200.0) + 1e-12;
    EXPECT_NEAR(sampled.mean_log10_energy[f], exhaustive_mean[f], tol) << fractions[f];
  }
  std::vector<double> ln_mean(exhaustive_mean.size());
  for (std::size_t f = 0; f < ln_mean.size(); ++f) ln_mean[f] = exhaustive_mean[f] * std::log(10.0);
  const double exact_eta = fit_line(fractions, ln_mean).slope;
  EXPECT_LT(std::abs(sampled.eta - exact_eta) / std::abs(exact_eta), 0.1);
}

TEST(EtaChainTest, DiagonalRemovalOrders) {
  const auto g = diagonal_gramian<Float50>({1.0, 2.0, 4.0}, 50);
  const auto largest_first =
      eta_exact_chain(g, {TargetSet{{0, 1, 2}}, TargetSet{{0, 1}}, TargetSet{{0}}}, kPrec50);
  ASSERT_EQ(largest_first.steps.size(), 2u);
  EXPECT_EQ(largest_first.steps[0], Float50(1));
  EXPECT_EQ(largest_first.steps[1], Float50(1));

  const auto smallest_first =
      eta_exact_chain(g, {TargetSet{{0, 1, 2}}, TargetSet{{1, 2}}, TargetSet{{2}}}, kPrec50);
  EXPECT_EQ(smallest_first.steps[0], Float50(2));
  EXPECT_EQ(smallest_first.steps[1], Float50(2));
  EXPECT_LT(test::relative_error(smallest_first.geometric_mean, Float50(2)), 1e-45);
  EXPECT_EQ(smallest_first.sizes, (std::vector<Index>{3, 2, 1}));
}

TEST(EtaChainTest, TelescopingAndOrderIndependence) {
  const Network net = make_static_network(6, 2.5, 2.5, 2.0, 31);
  const PrecisionConfig prec{100};
  const auto decomp = eig_decompose<Float100>(net.adjacency(), prec);
  const auto full =
      compute_full_gramian(decomp, build_input_matrix(select_drivers(net, 3, 32), 6), Horizon{}, prec);
  const std::vector<Index> start = {0, 1, 2, 3, 4, 5};
  const std::vector<Index> end = {1, 4};
  std::vector<Index> removed = {0, 2, 3, 5};
  std::optional<Float100> reference;
  do {
    std::vector<TargetSet> chain{TargetSet{start}};
    std::vector<Index> current = start;
    for (Index r : removed) {
      current.erase(std::find(current.begin(), current.end(), r));
      chain.push_back(TargetSet{current});
    }
    const auto c = eta_exact_chain(full, chain, prec);
    EXPECT_LT(c.telescoping_gap, 1e-80);
    for (const auto& s : c.steps) EXPECT_GE(s, Float100(1) - Float100(1e-80));
    if (!reference) reference = c.geometric_mean;
    EXPECT_LT(test::relative_error(c.geometric_mean, *reference), 1e-10);
  } while (std::next_permutation(removed.begin(), removed.end()));
}

TEST(PValueTest, Bounds) {
  EXPECT_DOUBLE_EQ(empirical_p_value(1.0, std::vector<double>(20, 0.0)), 1.0 / 21.0);
  EXPECT_DOUBLE_EQ(empirical_p_value(1.0, std::vector<double>(20, 2.0)), 1.0);
  EXPECT_DOUBLE_EQ(empirical_p_value(1.0, {0.0, 1.0, 2.0, 0.5}), 3.0 / 5.0);
}

TEST(DprTest, ReplicasPreserveDegrees) {
  const Network net = make_static_network(16, 2.5, 2.5, 2.5, 41);
  DprOptions opts;
  opts.drivers = 8;
  opts.plan.fractions = {0.25, 0.5, 0.75, 1.0};
  opts.plan.samples = 4;
  opts.plan.seed = 42;
  opts.plan.workers = 4;
  opts.replicas = 20;
  const DprReport r = dpr_significance(net, select_drivers(net, 8, 43), opts, kPrec50);
  EXPECT_TRUE(r.degrees_preserved);
  EXPECT_EQ(r.eta_ensemble.size(), 20u);
  EXPECT_EQ(r.iterations, default_swap_iterations(net));
  EXPECT_GE(r.p_value, 1.0 / 21.0);
  EXPECT_LE(r.p_value, 1.0);
  const std::string hist = r.histogram_csv(5);
  EXPECT_EQ(hist.substr(0, hist.find('\n')), "bin_lo,bin_hi,count");

  opts.replicas = 19;
  EXPECT_THROW(dpr_significance(net, select_drivers(net, 8, 43), opts, kPrec50), ConfigError);
}

TEST(LqSamplingTest, ZeroWeightMatchesMinimumEnergy) {
  const Network net = make_static_network(14, 2.5, 2.5, 2.5, 51);
  const InputSet inputs = select_drivers(net, 7, 52);
  SamplingPlan plan;
  plan.fractions = {0.3, 0.6, 1.0};
  plan.samples = 4;
  plan.seed = 53;
  const EnergyTable me = sample_energies(net, inputs, plan, Horizon{}, kPrec50);
  const EnergyTable lq = sample_lq_energies(net, inputs, 0.0, plan, Horizon{}, kPrec50);
  for (std::size_t f = 0; f < me.fractions.size(); ++f) {
    for (std::size_t s = 0; s < 4; ++s) {
      EXPECT_NEAR(lq.log10_energy[f][s], me.log10_energy[f][s], 1e-8);
    }
  }
}

}  // namespace
}  // namespace netctl
