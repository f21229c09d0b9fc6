#pragma once

// Config-driven experiments behind the command-line tool. Every command is a
// pure function of (config, seed): it returns the files it would write, so
// reruns produce identical bytes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "netctl/control_config.hpp"
#include "netctl/network.hpp"
#include "netctl/scaling.hpp"

namespace netctl {

struct ExperimentConfig {
  // Network source: a stored network JSON, an edge list, or the static model.
  std::optional<std::string> network_path;
  std::optional<std::string> edge_list_path;
  bool directed = true;
  Index n = 100;
  double gamma_in = 2.5;
  double gamma_out = 2.5;
  double k_av = 2.5;

  // Drivers: explicit nodes, or the fraction n_d of n.
  std::optional<std::vector<Index>> drivers;
  double n_d = 0.5;

  Horizon horizon;
  int digits = 100;
  std::vector<double> fractions = default_fractions();
  int samples = 50;
  std::vector<double> zeta = {0.0, 1.0, 10.0};
  std::uint64_t seed = 0;
  std::string out = "out";
  int workers = 0;  // 0: NETCTL_WORKERS or hardware concurrency
  int realizations = 1;

  // DPR.
  int replicas = 20;
  std::size_t dpr_iterations = 0;  // 0: 10 |E|
  bool self_comparison = false;

  // Single-problem commands (energy, simulate, check).
  std::optional<std::vector<Index>> targets;  // default: all nodes
  std::optional<std::vector<double>> x0;      // default: zero
  std::optional<std::vector<double>> yf;      // default: ones
  int report_points = 1001;

  /// Unknown keys are rejected. ConfigError on any invalid value.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  void validate() const;

  PrecisionConfig precision() const { return PrecisionConfig{digits}; }
  int resolved_workers() const;
  SamplingPlan plan(std::uint64_t plan_seed) const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Network and drivers of realization r. Stored or ingested networks are
/// used for every realization; generated ones are redrawn per realization.
struct Realization {
  Network net;
  InputSet inputs;
  std::uint64_t sampling_seed = 0;
};
Realization realize(const ExperimentConfig& cfg, int r);

/// Pooled over realizations.
ScalingResult run_eta(const ExperimentConfig& cfg);

ZetaRow zeta_row(const ExperimentConfig& cfg, double zeta);
std::vector<ZetaRow> run_zeta_sweep(const ExperimentConfig& cfg);
std::string zeta_csv(const std::vector<ZetaRow>& rows);

DprReport run_dpr(const ExperimentConfig& cfg);

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<OutputFile> files;
  std::string summary;  // one line for the terminal
  int exit_code = 0;
};

/// gen, energy, eta, dpr, lq, simulate, check.
CommandResult run_command(const std::string& command, const ExperimentConfig& cfg);

const std::vector<std::string>& command_names();

void write_outputs(const CommandResult& result, const std::filesystem::path& dir);

}  // namespace netctl
