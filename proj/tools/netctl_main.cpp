// netctl: target-control experiments on linear dynamical networks.
//
//   netctl <gen|energy|eta|dpr|lq|simulate|check> --config cfg.json
//          [--seed S] [--workers K] [--out DIR] [--digits A]
//
// Exit codes: 0 success, 2 config, 3 generation, 4 controllability,
// 5 solver, 1 anything else.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "netctl/error.hpp"
#include "netctl/experiment.hpp"
#include "netctl/io.hpp"

namespace {

const char* describe(const std::string& command) {
  if (command == "gen") return "generate a stabilized network";
  if (command == "energy") return "minimum-energy control of one maneuver";
  if (command == "eta") return "energy scaling against the target fraction";
  if (command == "dpr") return "eta against degree-preserving rewired replicas";
  if (command == "lq") return "eta across LQ state weights";
  if (command == "simulate") return "LQ trajectory of one maneuver";
  if (command == "check") return "output controllability of a target set";
  return "";
}

int run(int argc, char** argv) {
  CLI::App app{"Target control and energy scaling on linear dynamical networks"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<int> digits;
  for (const auto& name : netctl::command_names()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "experiment config JSON");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--workers", workers, "worker threads (default NETCTL_WORKERS or cores)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--digits", digits, "working precision in decimal digits");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(netctl::ErrorKind::kConfig);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json doc = nlohmann::json::object();
  if (!config_path.empty()) {
    try {
      doc = nlohmann::json::parse(netctl::read_text_file(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw netctl::ConfigError("cannot parse " + config_path + ": " + e.what());
    }
  }
  if (seed) doc["seed"] = *seed;
  if (workers) doc["workers"] = *workers;
  if (out) doc["out"] = *out;
  if (digits) doc["digits"] = *digits;
  const netctl::ExperimentConfig cfg = netctl::ExperimentConfig::from_json(doc);

  const netctl::CommandResult result = netctl::run_command(command, cfg);
  netctl::write_outputs(result, cfg.out);
  std::cout << command << ": " << result.summary << '\n';
  for (const auto& f : result.files) std::cout << "  wrote " << cfg.out << '/' << f.name << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const netctl::ControllabilityError& e) {
    std::cerr << "error: " << e.what();
    if (!e.mu1().empty()) std::cerr << " (mu1=" << e.mu1() << ")";
    std::cerr << '\n';
    return e.exit_code();
  } catch (const netctl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
