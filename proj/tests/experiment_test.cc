#include "netctl/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "netctl/error.hpp"
#include "netctl/io.hpp"
#include "test_util.hpp"

namespace netctl {
namespace {

using nlohmann::json;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "netctl_experiment_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json small_config() {
  return {{"n", 16}, {"gamma", 2.5}, {"k_av", 2.5}, {"seed", 5},        {"digits", 50},
          {"samples", 4}, {"fractions", {0.25, 0.5, 0.75, 1.0}}, {"workers", 1}};
}

const std::string& file(const CommandResult& r, const std::string& name) {
  for (const auto& f : r.files) {
    if (f.name == name) return f.content;
  }
  throw std::runtime_error("missing output " + name);
}

std::string write_chain(const std::filesystem::path& dir) {
  const auto path = dir / "chain.json";
  write_text_file(path, to_json(test::chain_network(3)).dump());
  return path.string();
}

TEST(ConfigTest, DefaultsAndOverrides) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(json::object());
  EXPECT_EQ(cfg.digits, 100);
  EXPECT_EQ(cfg.samples, 50);
  EXPECT_DOUBLE_EQ(cfg.n_d, 0.5);
  EXPECT_DOUBLE_EQ(cfg.horizon.tf, 1.0);
  EXPECT_EQ(cfg.fractions.size(), 10u);

  const ExperimentConfig er = ExperimentConfig::from_json({{"gamma", "inf"}, {"zeta", 2.0}});
  EXPECT_TRUE(std::isinf(er.gamma_in));
  EXPECT_TRUE(std::isinf(er.gamma_out));
  EXPECT_EQ(er.zeta, std::vector<double>{2.0});
}

TEST(ConfigTest, Rejections) {
  EXPECT_THROW(ExperimentConfig::from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"network", "a"}, {"edge_list", "b"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"n_d", 0.0}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"digits", 10}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"replicas", 19}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"samples", "many"}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json({{"gamma", "huge"}}), ConfigError);
  EXPECT_THROW(run_command("plot", ExperimentConfig{}), ConfigError);
}

TEST(GenCommandTest, DeterministicAndOnDegree) {
  ExperimentConfig cfg = ExperimentConfig::from_json({{"n", 100}, {"gamma", 2.5}, {"seed", 3}});
  const CommandResult a = run_command("gen", cfg);
  const CommandResult b = run_command("gen", cfg);
  EXPECT_EQ(file(a, "network.json"), file(b, "network.json"));
  EXPECT_EQ(file(a, "summary.json"), file(b, "summary.json"));
  const json summary = json::parse(file(a, "summary.json"));
  EXPECT_NEAR(summary["k_av"].get<double>(), 2.5, 0.025);
  EXPECT_NEAR(summary["max_real_eigenvalue"].get<double>(), -1.0, 1e-8);

  const json er = json::parse(file(
      run_command("gen", ExperimentConfig::from_json({{"gamma", "inf"}, {"n", 50}})),
      "network.json"));
  EXPECT_EQ(er["meta"]["gamma_in"], "inf");
}

TEST(EnergyCommandTest, ChainSingleTarget) {
  const auto dir = scratch("energy");
  const std::string net = write_chain(dir);
  const ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"network", net}, {"drivers", {0}}, {"targets", {2}}, {"yf", {1.0}}, {"digits", 50},
       {"report_points", 101}});
  const CommandResult r = run_command("energy", cfg);
  const json doc = json::parse(file(r, "energy.json"));
  EXPECT_LE(doc["reach_error"].get<double>(), 1e-6);
  const double closed = std::stod(doc["E_closed_form"].get<std::string>());
  EXPECT_LT(std::abs(doc["E_quadrature"].get<double>() - closed) / closed, 1e-8);
  EXPECT_EQ(file(r, "control.csv").substr(0, 5), "t,u1\n");
  EXPECT_EQ(std::count(file(r, "state.csv").begin(), file(r, "state.csv").end(), '\n'), 102);

  write_outputs(r, dir / "out");
  EXPECT_EQ(read_text_file(dir / "out" / "energy.json"), file(r, "energy.json"));
}

TEST(EnergyCommandTest, ZeroManeuverAndTargetOrdering) {
  const auto dir = scratch("energy_zero");
  const std::string net = write_chain(dir);
  const ExperimentConfig zero = ExperimentConfig::from_json(
      {{"network", net}, {"drivers", {0}}, {"targets", {2}}, {"yf", {0.0}}, {"digits", 50}});
  const json doc = json::parse(file(run_command("energy", zero), "energy.json"));
  EXPECT_EQ(std::stod(doc["E_closed_form"].get<std::string>()), 0.0);

  const ExperimentConfig single = ExperimentConfig::from_json(
      {{"network", net}, {"drivers", {0}}, {"targets", {2}}, {"digits", 50}});
  const ExperimentConfig full =
      ExperimentConfig::from_json({{"network", net}, {"drivers", {0}}, {"digits", 50}});
  const double e_single = std::stod(
      json::parse(file(run_command("energy", single), "energy.json"))["E_max"].get<std::string>());
  const double e_full = std::stod(
      json::parse(file(run_command("energy", full), "energy.json"))["E_max"].get<std::string>());
  EXPECT_LE(e_single, e_full);
}

TEST(CheckCommandTest, DisconnectedTargetIsUncontrollable) {
  const auto dir = scratch("check");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a.diagonal() << -1.0, -2.0, -3.0, -4.0;
  a(1, 0) = 1.0;
  a(3, 2) = 1.0;
  const auto path = dir / "split.json";
  write_text_file(path, to_json(test::network_from_matrix(a)).dump());
  const ExperimentConfig bad = ExperimentConfig::from_json(
      {{"network", path.string()}, {"drivers", {0}}, {"targets", {3}}, {"digits", 50}});
  const CommandResult r = run_command("check", bad);
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_FALSE(json::parse(file(r, "check.json"))["controllable"].get<bool>());
  EXPECT_THROW(run_command("energy", bad), ControllabilityError);

  const ExperimentConfig good = ExperimentConfig::from_json(
      {{"network", path.string()}, {"drivers", {0, 2}}, {"digits", 50}});
  EXPECT_EQ(run_command("check", good).exit_code, 0);
}

TEST(SimulateCommandTest, LqScalarStandIn) {
  const auto dir = scratch("simulate");
  const std::string net = write_chain(dir);
  const ExperimentConfig cfg = ExperimentConfig::from_json({{"network", net},
                                                            {"drivers", {0}},
                                                            {"targets", {2}},
                                                            {"zeta", {3.0}},
                                                            {"digits", 50},
                                                            {"report_points", 201}});
  const json doc = json::parse(file(run_command("simulate", cfg), "lq_trajectory.json"));
  EXPECT_LE(doc["reach_error"].get<double>(), 1e-6);
  EXPECT_LT(doc["care_residual"].get<double>(), 1e-30);
}

TEST(EtaCommandTest, DeterministicAndNeedsThreeFractions) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(small_config());
  const CommandResult a = run_command("eta", cfg);
  ExperimentConfig more_workers = cfg;
  more_workers.workers = 3;
  const CommandResult b = run_command("eta", more_workers);
  EXPECT_EQ(file(a, "eta.json"), file(b, "eta.json"));
  EXPECT_EQ(file(a, "eta.csv"), file(b, "eta.csv"));

  json one = small_config();
  one["fractions"] = {1.0};
  EXPECT_THROW(run_command("eta", ExperimentConfig::from_json(one)), ConfigError);
}

TEST(EtaCommandTest, RealizationsPool) {
  json doc = small_config();
  doc["realizations"] = 3;
  const ScalingResult r = run_eta(ExperimentConfig::from_json(doc));
  EXPECT_EQ(r.samples_per_point, 12);
}

TEST(LqCommandTest, ZeroWeightRowMatchesEta) {
  json doc = small_config();
  doc["zeta"] = {0.0, 1.0};
  const ExperimentConfig cfg = ExperimentConfig::from_json(doc);
  const double eta = run_eta(cfg).eta;
  const CommandResult r = run_command("lq", cfg);
  const std::string csv = file(r, "lq.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "zeta,eta,mean_log10_E");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const std::vector<ZetaRow> rows = run_zeta_sweep(cfg);
  EXPECT_LT(std::abs(rows[0].eta - eta), 1e-6);
  EXPECT_EQ(zeta_csv(rows), csv);
}

TEST(DprCommandTest, SelfComparison) {
  json doc = small_config();
  doc["self_comparison"] = true;
  const CommandResult r = run_command("dpr", ExperimentConfig::from_json(doc));
  const json report = json::parse(file(r, "dpr.json"));
  EXPECT_TRUE(report["degrees_preserved"].get<bool>());
  EXPECT_EQ(report["iterations"].get<int>(), 0);
  EXPECT_EQ(report["eta_ensemble"].size(), 20u);
  const double p = report["p_value"].get<double>();
  EXPECT_GE(p, 1.0 / 21.0);
  EXPECT_LE(p, 1.0);
}

}  // namespace
}  // namespace netctl
