#include "netctl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "netctl/error.hpp"
#include "netctl/gramian.hpp"
#include "netctl/io.hpp"
#include "netctl/lq_control.hpp"
#include "netctl/min_energy.hpp"
#include "netctl/parallel.hpp"
#include "netctl/random.hpp"

namespace netctl {
namespace {

using nlohmann::json;

// Stream ids of derive_seed(seed, r, k) for one realization.
constexpr std::uint64_t kNetworkStream = 0;
constexpr std::uint64_t kDriverStream = 1;
constexpr std::uint64_t kSamplingStream = 2;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "network",  "edge_list", "directed",     "n",          "gamma",       "gamma_in",
      "gamma_out", "k_av",     "drivers",      "n_d",        "t0",          "tf",
      "digits",   "fractions", "samples",      "zeta",       "seed",        "out",
      "workers",  "realizations", "replicas",  "dpr_iterations", "self_comparison",
      "targets",  "x0",        "yf",           "report_points"};
  return keys;
}

double exponent(const json& j, const char* key) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return NetworkMeta::kInfinity;
  } else if (j.is_number()) {
    return j.get<double>();
  }
  throw ConfigError(std::string(key) + " must be a number or \"inf\"");
}

json exponent_json(double gamma) {
  if (std::isinf(gamma)) return "inf";
  return gamma;
}

std::string decimal(double x) { return format_g17(x); }

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

void pool(EnergyTable& into, const EnergyTable& table, bool first) {
  if (first) {
    into = table;
  } else {
    into.append(table);
  }
}

Eigen::MatrixXd squared_norms(const Eigen::MatrixXd& samples) {
  return samples.colwise().squaredNorm();
}

ControlProblem single_problem(const ExperimentConfig& cfg, const Realization& real) {
  const Index n = real.net.n;
  TargetSet targets;
  if (cfg.targets) {
    targets.nodes = *cfg.targets;
  } else {
    targets.nodes.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) targets.nodes[static_cast<std::size_t>(i)] = i;
  }
  targets.validate(n);
  const Eigen::VectorXd x0 = cfg.x0 ? to_vector(*cfg.x0) : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd yf =
      cfg.yf ? to_vector(*cfg.yf) : Eigen::VectorXd::Ones(targets.size());
  return make_problem(real.net, real.inputs, targets, x0, yf, cfg.horizon);
}

json problem_json(const ControlProblem& prob) {
  return {{"n", prob.n()},
          {"drivers", prob.inputs.nodes},
          {"targets", prob.targets.nodes},
          {"t0", prob.horizon.t0},
          {"tf", prob.horizon.tf}};
}

CommandResult cmd_gen(const ExperimentConfig& cfg) {
  const Realization real = realize(cfg, 0);
  const Network& net = real.net;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(net.adjacency(), false)
                                  .eigenvalues();
  const DegreeSequence deg = degree_sequence(net);
  json summary = {{"n", net.n},
                  {"edges", net.edges.size()},
                  {"k_av", deg.average},
                  {"max_real_eigenvalue", ev.real().maxCoeff()},
                  {"min_real_eigenvalue", ev.real().minCoeff()},
                  {"max_in_degree", *std::max_element(deg.in_degrees.begin(), deg.in_degrees.end())},
                  {"max_out_degree",
                   *std::max_element(deg.out_degrees.begin(), deg.out_degrees.end())},
                  {"drivers", real.inputs.nodes},
                  {"source", net.meta.source},
                  {"seed", net.meta.seed}};
  CommandResult out;
  out.files.push_back({"network.json", to_json(net).dump(2) + "\n"});
  out.files.push_back({"summary.json", summary.dump(2) + "\n"});
  out.summary = "n=" + std::to_string(net.n) + " edges=" + std::to_string(net.edges.size()) +
                " k_av=" + decimal(deg.average) +
                " max_re_lambda=" + decimal(ev.real().maxCoeff());
  return out;
}

CommandResult cmd_check(const ExperimentConfig& cfg) {
  const Realization real = realize(cfg, 0);
  const ControlProblem prob = single_problem(cfg, real);
  const ControllabilityReport r = output_controllability_check(
      real.net, prob.inputs, prob.targets, prob.horizon, cfg.precision());
  json doc = problem_json(prob);
  doc["controllable"] = r.controllable;
  doc["mu1"] = r.mu1_decimal;
  doc["threshold"] = r.threshold_decimal;
  doc["digits"] = cfg.digits;
  CommandResult out;
  out.files.push_back({"check.json", doc.dump(2) + "\n"});
  out.summary = std::string(r.controllable ? "output controllable" : "not output controllable") +
                " (mu1=" + r.mu1_decimal.substr(0, 24) + ")";
  out.exit_code = r.controllable ? 0 : static_cast<int>(ErrorKind::kControllability);
  return out;
}

CommandResult cmd_energy(const ExperimentConfig& cfg) {
  const Realization real = realize(cfg, 0);
  const ControlProblem prob = single_problem(cfg, real);
  const PrecisionConfig prec = cfg.precision();
  return with_precision(prec, [&]<typename Scalar>(std::type_identity<Scalar>) {
    const auto decomp = eig_decompose<Scalar>(prob.a, prec);
    const auto gram =
        compute_gramian(decomp, prob.input_matrix(), prob.targets, prob.horizon, prec);
    const auto spec = spectrum(gram);
    const auto worst = worst_case_energy(spec.values(0), prec);
    const auto man = maneuver(prob, decomp);
    const ControlSignal u = min_energy_input(prob, man, spec, decomp, prec, cfg.report_points);
    const Trajectory traj = simulate(prob, u, cfg.report_points);
    const Scalar e = energy_closed_form(man, spec, prec);
    const auto [lo, hi] = energy_bounds(man, spec);
    const double eq = energy_quadrature(u, gauss_legendre(kDefaultQuadratureOrder,
                                                          prob.horizon.t0, prob.horizon.tf));
    json doc = problem_json(prob);
    doc["E_closed_form"] = to_decimal_string(e, cfg.digits);
    doc["E_quadrature"] = eq;
    doc["E_lower"] = to_decimal_string(lo, cfg.digits);
    doc["E_upper"] = to_decimal_string(hi, cfg.digits);
    doc["E_max"] = to_decimal_string(worst.energy, cfg.digits);
    doc["mu1"] = to_decimal_string(spec.values(0), cfg.digits);
    doc["reach_error"] = reach_error(traj, prob.yf);
    doc["digits"] = cfg.digits;

    CommandResult out;
    out.files.push_back({"energy.json", doc.dump(2) + "\n"});
    out.files.push_back(
        {"control.csv", time_series_csv(series_header("u", u.channels), u.times, u.samples)});
    out.files.push_back({"power.csv", time_series_csv({"t", "u_squared"}, u.times,
                                                      squared_norms(u.samples))});
    out.files.push_back(
        {"state.csv", time_series_csv(series_header("x", prob.n()), traj.times, traj.states)});
    out.files.push_back(
        {"output.csv", time_series_csv(series_header("y", prob.p()), traj.times, traj.outputs)});
    out.summary = "E=" + to_decimal_string(e, 17) + " E_quadrature=" + decimal(eq) +
                  " reach_error=" + decimal(doc["reach_error"].get<double>());
    return out;
  });
}

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
  const Realization real = realize(cfg, 0);
  const ControlProblem prob = single_problem(cfg, real);
  const PrecisionConfig prec = cfg.precision();
  const double zeta = cfg.zeta.front();
  return with_precision(prec, [&]<typename Scalar>(std::type_identity<Scalar>) {
    const QuadraticCost cost = QuadraticCost::scaled_identity(prob.n(), prob.m(), zeta);
    const RiccatiSolution care = solve_care(bar_matrices(prob.a, prob.input_matrix(), cost));
    const ClosedLoop<Scalar> loop = closed_loop<Scalar>(prob.input_matrix(), care, prec);
    const TildeSystem<Scalar> tilde = tilde_system(prob, loop, prec);
    const LqTrajectory lq = lq_optimal_input(prob, loop, tilde, prec, cfg.report_points);
    const LqEnergy<Scalar> e =
        lq_energy(prob, loop, tilde,
                  gauss_legendre(kDefaultQuadratureOrder, prob.horizon.t0, prob.horizon.tf),
                  prec);
    json doc = problem_json(prob);
    doc["zeta"] = zeta;
    doc["E_total"] = to_decimal_string(e.total, cfg.digits);
    doc["E_state_terms"] = to_decimal_string(e.state_terms, cfg.digits);
    doc["E_feedforward"] = to_decimal_string(e.feedforward, cfg.digits);
    doc["quadratic_form"] = to_decimal_string(e.quadratic_form, cfg.digits);
    doc["reach_error"] = reach_error(lq.trajectory, prob.yf);
    doc["care_residual_hardware"] = care.residual;
    doc["care_residual"] = loop.residual;
    doc["newton_steps"] = loop.newton_steps;
    doc["digits"] = cfg.digits;

    CommandResult out;
    out.files.push_back({"lq_trajectory.json", doc.dump(2) + "\n"});
    out.files.push_back({"lq_control.csv", time_series_csv(series_header("u", prob.m()),
                                                           lq.signal.times, lq.signal.samples)});
    out.files.push_back({"lq_state.csv", time_series_csv(series_header("x", prob.n()),
                                                         lq.trajectory.times,
                                                         lq.trajectory.states)});
    out.files.push_back({"lq_output.csv", time_series_csv(series_header("y", prob.p()),
                                                          lq.trajectory.times,
                                                          lq.trajectory.outputs)});
    out.summary = "zeta=" + decimal(zeta) + " E_c=" + to_decimal_string(e.total, 17) +
                  " reach_error=" + decimal(doc["reach_error"].get<double>());
    return out;
  });
}

json config_echo(const ExperimentConfig& cfg) {
  json doc = cfg.to_json();
  doc.erase("out");
  doc.erase("workers");
  return doc;
}

CommandResult cmd_eta(const ExperimentConfig& cfg) {
  const ScalingResult r = run_eta(cfg);
  json doc = r.to_json();
  doc["config"] = config_echo(cfg);
  CommandResult out;
  out.files.push_back({"eta.json", doc.dump(2) + "\n"});
  out.files.push_back({"eta.csv", r.to_csv()});
  out.summary = "eta=" + decimal(r.eta) + " r_squared=" + decimal(r.r_squared);
  return out;
}

ScalingResult lq_scaling(const ExperimentConfig& cfg, double zeta) {
  EnergyTable pooled;
  for (int r = 0; r < cfg.realizations; ++r) {
    const Realization real = realize(cfg, r);
    pool(pooled,
         sample_lq_energies(real.net, real.inputs, zeta, cfg.plan(real.sampling_seed),
                            cfg.horizon, cfg.precision()),
         r == 0);
  }
  pooled.seed = cfg.seed;
  return fit_eta(pooled);
}

ZetaRow row_from(double zeta, const ScalingResult& r) {
  return {zeta, r.eta, r.mean_log10_energy.back(), r.r_squared};
}

CommandResult cmd_lq(const ExperimentConfig& cfg) {
  std::vector<ZetaRow> rows;
  json per_zeta = json::array();
  for (double zeta : cfg.zeta) {
    const ScalingResult r = lq_scaling(cfg, zeta);
    rows.push_back(row_from(zeta, r));
    json entry = r.to_json();
    entry["zeta"] = zeta;
    per_zeta.push_back(entry);
  }
  double lo = rows.front().eta, hi = rows.front().eta, mean = 0.0;
  for (const auto& row : rows) {
    lo = std::min(lo, row.eta);
    hi = std::max(hi, row.eta);
    mean += row.eta / static_cast<double>(rows.size());
  }
  json doc = {{"sweep", per_zeta},
              {"eta_relative_spread", (hi - lo) / std::abs(mean)},
              {"config", config_echo(cfg)}};
  CommandResult out;
  out.files.push_back({"lq.csv", zeta_csv(rows)});
  out.files.push_back({"lq.json", doc.dump(2) + "\n"});
  std::string s;
  for (const auto& row : rows) s += "zeta=" + decimal(row.zeta) + ":eta=" + decimal(row.eta) + " ";
  out.summary = s + "spread=" + decimal(doc["eta_relative_spread"].get<double>());
  return out;
}

CommandResult cmd_dpr(const ExperimentConfig& cfg) {
  const DprReport r = run_dpr(cfg);
  json doc = r.to_json();
  doc["config"] = config_echo(cfg);
  CommandResult out;
  out.files.push_back({"dpr.json", doc.dump(2) + "\n"});
  out.files.push_back({"dpr_histogram.csv", r.histogram_csv()});
  out.summary = "eta_real=" + decimal(r.eta_real) + " p_value=" + decimal(r.p_value) +
                " degrees_preserved=" + (r.degrees_preserved ? "true" : "false");
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  try {
    if (doc.contains("network")) cfg.network_path = doc.at("network").get<std::string>();
    if (doc.contains("edge_list")) cfg.edge_list_path = doc.at("edge_list").get<std::string>();
    cfg.directed = doc.value("directed", cfg.directed);
    cfg.n = doc.value("n", cfg.n);
    if (doc.contains("gamma")) {
      cfg.gamma_in = cfg.gamma_out = exponent(doc.at("gamma"), "gamma");
    }
    if (doc.contains("gamma_in")) cfg.gamma_in = exponent(doc.at("gamma_in"), "gamma_in");
    if (doc.contains("gamma_out")) cfg.gamma_out = exponent(doc.at("gamma_out"), "gamma_out");
    cfg.k_av = doc.value("k_av", cfg.k_av);
    if (doc.contains("drivers")) cfg.drivers = doc.at("drivers").get<std::vector<Index>>();
    cfg.n_d = doc.value("n_d", cfg.n_d);
    cfg.horizon.t0 = doc.value("t0", cfg.horizon.t0);
    cfg.horizon.tf = doc.value("tf", cfg.horizon.tf);
    cfg.digits = doc.value("digits", cfg.digits);
    if (doc.contains("fractions")) cfg.fractions = doc.at("fractions").get<std::vector<double>>();
    cfg.samples = doc.value("samples", cfg.samples);
    if (doc.contains("zeta")) {
      const auto& z = doc.at("zeta");
      cfg.zeta = z.is_array() ? z.get<std::vector<double>>() : std::vector<double>{z.get<double>()};
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out = doc.value("out", cfg.out);
    cfg.workers = doc.value("workers", cfg.workers);
    cfg.realizations = doc.value("realizations", cfg.realizations);
    cfg.replicas = doc.value("replicas", cfg.replicas);
    cfg.dpr_iterations = doc.value("dpr_iterations", cfg.dpr_iterations);
    cfg.self_comparison = doc.value("self_comparison", cfg.self_comparison);
    if (doc.contains("targets")) cfg.targets = doc.at("targets").get<std::vector<Index>>();
    if (doc.contains("x0")) cfg.x0 = doc.at("x0").get<std::vector<double>>();
    if (doc.contains("yf")) cfg.yf = doc.at("yf").get<std::vector<double>>();
    cfg.report_points = doc.value("report_points", cfg.report_points);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json ExperimentConfig::to_json() const {
  json doc = {{"directed", directed},
              {"n", n},
              {"gamma_in", exponent_json(gamma_in)},
              {"gamma_out", exponent_json(gamma_out)},
              {"k_av", k_av},
              {"n_d", n_d},
              {"t0", horizon.t0},
              {"tf", horizon.tf},
              {"digits", digits},
              {"fractions", fractions},
              {"samples", samples},
              {"zeta", zeta},
              {"seed", seed},
              {"out", out},
              {"workers", workers},
              {"realizations", realizations},
              {"replicas", replicas},
              {"dpr_iterations", dpr_iterations},
              {"self_comparison", self_comparison},
              {"report_points", report_points}};
  if (network_path) doc["network"] = *network_path;
  if (edge_list_path) doc["edge_list"] = *edge_list_path;
  if (drivers) doc["drivers"] = *drivers;
  if (targets) doc["targets"] = *targets;
  if (x0) doc["x0"] = *x0;
  if (yf) doc["yf"] = *yf;
  return doc;
}

void ExperimentConfig::validate() const {
  if (network_path && edge_list_path) {
    throw ConfigError("config must name exactly one network source");
  }
  if (!network_path && !edge_list_path) {
    if (n < 2) throw ConfigError("n must be at least 2");
    if (!(k_av > 0.0)) throw ConfigError("k_av must be positive");
  }
  if (!drivers && !(n_d > 0.0 && n_d <= 1.0)) throw ConfigError("n_d must lie in (0, 1]");
  if (drivers && drivers->empty()) throw ConfigError("driver list is empty");
  if (!(horizon.tf > horizon.t0)) throw ConfigError("tf must exceed t0");
  precision().validate();
  SamplingPlan{fractions, samples, seed, 1}.validate();
  if (zeta.empty()) throw ConfigError("zeta list is empty");
  for (double z : zeta) {
    if (!(z >= 0.0)) throw ConfigError("zeta values must be non-negative");
  }
  if (realizations < 1) throw ConfigError("realizations must be at least 1");
  if (workers < 0) throw ConfigError("workers must be non-negative");
  if (replicas < 20) throw ConfigError("replicas must be at least 20");
  if (report_points < 2) throw ConfigError("report_points must be at least 2");
  if (targets && targets->empty()) throw ConfigError("target list is empty");
  if (yf && targets && yf->size() != targets->size()) {
    throw ConfigError("yf length must match the target count");
  }
}

int ExperimentConfig::resolved_workers() const {
  return workers > 0 ? workers : default_workers();
}

SamplingPlan ExperimentConfig::plan(std::uint64_t plan_seed) const {
  return SamplingPlan{fractions, samples, plan_seed, resolved_workers()};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(doc);
}

Realization realize(const ExperimentConfig& cfg, int r) {
  const auto rr = static_cast<std::uint64_t>(r);
  Realization out;
  if (cfg.network_path) {
    json doc;
    try {
      doc = json::parse(read_text_file(*cfg.network_path));
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + *cfg.network_path + ": " + e.what());
    }
    out.net = network_from_json(doc);
    if (!out.net.weighted()) {
      out.net = stabilize(assign_weights(out.net, derive_seed(cfg.seed, kNetworkStream)));
    }
  } else if (cfg.edge_list_path) {
    std::istringstream in(read_text_file(*cfg.edge_list_path));
    out.net = load_edge_list(in, cfg.directed, derive_seed(cfg.seed, kNetworkStream),
                             *cfg.edge_list_path)
                  .network;
  } else {
    out.net = make_static_network(cfg.n, cfg.gamma_in, cfg.gamma_out, cfg.k_av,
                                  derive_seed(cfg.seed, rr, kNetworkStream));
  }
  if (cfg.drivers) {
    out.inputs.nodes = *cfg.drivers;
    out.inputs.validate(out.net.n);
  } else {
    out.inputs = select_drivers(out.net, driver_count(out.net.n, cfg.n_d),
                                derive_seed(cfg.seed, rr, kDriverStream));
  }
  out.sampling_seed = derive_seed(cfg.seed, rr, kSamplingStream);
  return out;
}

ScalingResult run_eta(const ExperimentConfig& cfg) {
  EnergyTable pooled;
  for (int r = 0; r < cfg.realizations; ++r) {
    const Realization real = realize(cfg, r);
    pool(pooled,
         sample_energies(real.net, real.inputs, cfg.plan(real.sampling_seed), cfg.horizon,
                         cfg.precision()),
         r == 0);
  }
  pooled.seed = cfg.seed;
  return fit_eta(pooled);
}

ZetaRow zeta_row(const ExperimentConfig& cfg, double zeta) {
  return row_from(zeta, lq_scaling(cfg, zeta));
}

std::vector<ZetaRow> run_zeta_sweep(const ExperimentConfig& cfg) {
  std::vector<ZetaRow> rows;
  for (double zeta : cfg.zeta) rows.push_back(zeta_row(cfg, zeta));
  return rows;
}

std::string zeta_csv(const std::vector<ZetaRow>& rows) {
  std::string out = "zeta,eta,mean_log10_E\n";
  for (const auto& row : rows) {
    out += format_g17(row.zeta) + ',' + format_g17(row.eta) + ',' +
           format_g17(row.mean_log10_energy) + '\n';
  }
  return out;
}

DprReport run_dpr(const ExperimentConfig& cfg) {
  const Realization real = realize(cfg, 0);
  DprOptions opts;
  opts.drivers = real.inputs.size();
  opts.plan = cfg.plan(real.sampling_seed);
  opts.horizon = cfg.horizon;
  opts.replicas = cfg.replicas;
  opts.iterations = cfg.dpr_iterations;
  opts.self_comparison = cfg.self_comparison;
  return dpr_significance(real.net, real.inputs, opts, cfg.precision());
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gen", "energy",   "eta",  "dpr",
                                                 "lq",  "simulate", "check"};
  return names;
}

CommandResult run_command(const std::string& command, const ExperimentConfig& cfg) {
  cfg.validate();
  if (command == "gen") return cmd_gen(cfg);
  if (command == "energy") return cmd_energy(cfg);
  if (command == "eta") return cmd_eta(cfg);
  if (command == "dpr") return cmd_dpr(cfg);
  if (command == "lq") return cmd_lq(cfg);
  if (command == "simulate") return cmd_simulate(cfg);
  if (command == "check") return cmd_check(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

void write_outputs(const CommandResult& result, const std::filesystem::path& dir) {
  for (const auto& file : result.files) write_text_file(dir / file.name, file.content);
}

}  // namespace netctl
