#include "netctl/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "netctl/error.hpp"
#include "netctl/io.hpp"
#include "netctl/lq_control.hpp"
#include "netctl/parallel.hpp"
#include "netctl/quadrature.hpp"
#include "netctl/random.hpp"

namespace netctl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Keeps replica streams apart from the sampling streams of the original.
constexpr std::uint64_t kReplicaStream = 0x5245504c;

}  // namespace

std::vector<double> default_fractions() {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) out.push_back(k / 10.0);
  return out;
}

void SamplingPlan::validate() const {
  if (fractions.empty()) throw ConfigError("at least one target fraction is required");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
      throw ConfigError("target fractions must lie in (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw ConfigError("target fractions must be strictly ascending");
    }
  }
  if (samples < 2) throw ConfigError("samples per fraction must be at least 2");
}

Index target_size(Index n, double fraction) {
  const auto p = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<Index>(p, 1, n);
}

void EnergyTable::append(const EnergyTable& other) {
  if (other.fractions != fractions || other.sizes != sizes) {
    throw ConfigError("cannot pool energy tables over different fractions");
  }
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    log10_energy[f].insert(log10_energy[f].end(), other.log10_energy[f].begin(),
                           other.log10_energy[f].end());
    failures[f] += other.failures[f];
  }
  failure_messages.insert(failure_messages.end(), other.failure_messages.begin(),
                          other.failure_messages.end());
}

TargetSet planned_target_set(Index n, Index p, std::uint64_t seed, std::size_t f,
                             std::size_t s) {
  return sample_target_set(n, p, derive_seed(seed, f, s));
}

EnergyTable sample_table(Index n, const SamplingPlan& plan, const TargetEnergy& energy) {
  plan.validate();
  const std::size_t nf = plan.fractions.size();
  const auto ns = static_cast<std::size_t>(plan.samples);
  EnergyTable table;
  table.n = n;
  table.fractions = plan.fractions;
  table.seed = plan.seed;
  for (double f : plan.fractions) table.sizes.push_back(target_size(n, f));
  table.log10_energy.assign(nf, std::vector<double>(ns, kNaN));
  table.failures.assign(nf, 0);

  std::vector<std::string> messages(nf * ns);
  parallel_for(nf * ns, plan.workers, [&](std::size_t task) {
    const std::size_t f = task / ns;
    const std::size_t s = task % ns;
    const TargetSet targets = planned_target_set(n, table.sizes[f], plan.seed, f, s);
    try {
      table.log10_energy[f][s] = energy(targets);
    } catch (const ControllabilityError& e) {
      messages[task] = e.what();
    }
  });
  for (std::size_t task = 0; task < messages.size(); ++task) {
    if (messages[task].empty()) continue;
    const std::size_t f = task / ns;
    ++table.failures[f];
    table.failure_messages.push_back("fraction " + format_g17(table.fractions[f]) +
                                     " sample " + std::to_string(task % ns) + ": " +
                                     messages[task]);
  }
  return table;
}

template <typename Scalar>
EnergyTable sample_energies(const Gramian<Scalar>& full, const SamplingPlan& plan,
                            const PrecisionConfig& prec) {
  return sample_table(full.size(), plan, [&](const TargetSet& targets) {
    return worst_case_energy(reduce(full, targets), prec).log10_energy;
  });
}

EnergyTable sample_energies(const Network& net, const InputSet& inputs,
                            const SamplingPlan& plan, const Horizon& horizon,
                            const PrecisionConfig& prec) {
  plan.validate();
  inputs.validate(net.n);
  return with_precision(prec, [&]<typename Scalar>(std::type_identity<Scalar>) {
    const auto decomp = eig_decompose<Scalar>(net.adjacency(), prec);
    const auto full =
        compute_full_gramian(decomp, build_input_matrix(inputs, net.n), horizon, prec);
    worst_case_energy(full, prec);
    return sample_energies(full, plan, prec);
  });
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit_line: x and y differ in length");
  if (std::set<double>(x.begin(), x.end()).size() < 2) {
    throw ConfigError("fit_line: abscissa is degenerate");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    yy += y[i] * y[i];
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // Spread at rounding level counts as a constant ordinate.
  const double flat = 64.0 * std::numeric_limits<double>::epsilon() * yy;
  fit.r_squared = syy > flat ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

ScalingResult fit_eta(const EnergyTable& table) {
  ScalingResult out;
  out.n = table.n;
  out.seed = table.seed;
  std::vector<double> x, y;
  for (std::size_t f = 0; f < table.fractions.size(); ++f) {
    const auto& row = table.log10_energy[f];
    out.samples_per_point = std::max(out.samples_per_point, static_cast<int>(row.size()));
    double sum = 0.0;
    std::size_t ok = 0;
    for (double v : row) {
      if (std::isnan(v)) continue;
      sum += v;
      ++ok;
    }
    if (ok == 0) continue;
    const double mean = sum / static_cast<double>(ok);
    double ss = 0.0;
    for (double v : row) {
      if (!std::isnan(v)) ss += (v - mean) * (v - mean);
    }
    const double frac = static_cast<double>(table.sizes[f]) / static_cast<double>(table.n);
    out.fractions.push_back(frac);
    out.sizes.push_back(table.sizes[f]);
    out.mean_log10_energy.push_back(mean);
    out.std_log10_energy.push_back(ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1)) : 0.0);
    out.successes.push_back(ok);
    out.failures.push_back(table.failures[f]);
    x.push_back(frac);
    y.push_back(mean * std::log(10.0));
  }
  if (std::set<double>(x.begin(), x.end()).size() < 3) {
    throw ConfigError("fitting eta needs at least three distinct target fractions with "
                      "successful samples");
  }
  const LineFit fit = fit_line(x, y);
  out.eta = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  return out;
}

nlohmann::json ScalingResult::to_json() const {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    points.push_back({{"fraction", fractions[i]},
                      {"p", sizes[i]},
                      {"mean_log10_E", mean_log10_energy[i]},
                      {"std_log10_E", std_log10_energy[i]},
                      {"successes", successes[i]},
                      {"failures", failures[i]}});
  }
  return {{"n", n},
          {"eta", eta},
          {"intercept", intercept},
          {"r_squared", r_squared},
          {"samples_per_point", samples_per_point},
          {"seed", seed},
          {"log_convention",
           "samples are log10 E_max; eta and intercept fit mean ln E_max = eta * p/n + "
           "intercept"},
          {"points", points}};
}

std::string ScalingResult::to_csv() const {
  std::ostringstream out;
  out << "fraction,mean_log10_E,std_log10_E\n";
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    out << format_g17(fractions[i]) << ',' << format_g17(mean_log10_energy[i]) << ','
        << format_g17(std_log10_energy[i]) << '\n';
  }
  return out.str();
}

template <typename Scalar>
EtaChain<Scalar> eta_exact_chain(const Gramian<Scalar>& full, const std::vector<TargetSet>& chain,
                                 const PrecisionConfig& prec) {
  using std::exp;
  using std::log;
  using std::abs;
  if (chain.empty()) throw ConfigError("empty target chain");
  EtaChain<Scalar> out;
  std::vector<Gramian<Scalar>> grams;
  std::vector<Scalar> mus;
  for (const auto& targets : chain) {
    grams.push_back(reduce(full, targets));
    mus.push_back(smallest_eigenvalue(grams.back()));
    if (!(mus.back() > prec.zero_threshold<Scalar>())) {
      throw ControllabilityError("chain element of size " + std::to_string(targets.size()) +
                                     " is not output controllable",
                                 to_decimal_string(mus.back(), prec.digits));
    }
    out.sizes.push_back(targets.size());
    out.log_emax.push_back(to_double(-log(mus.back())));
  }
  Scalar log_sum(0);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (chain[i].size() + 1 != chain[i - 1].size()) {
      throw ConfigError("each chain step must remove exactly one target");
    }
    reduce(grams[i - 1], chain[i]);  // subset check
    if (mus[i] < mus[i - 1] - prec.interlacing_tolerance<Scalar>()) {
      throw NumericalError("eta step below one along the chain");
    }
    out.steps.push_back(mus[i] / mus[i - 1]);
    log_sum += log(out.steps.back());
  }
  out.geometric_mean =
      out.steps.empty() ? Scalar(1) : exp(log_sum / Scalar(static_cast<double>(out.steps.size())));
  const Scalar expected = log(mus.back()) - log(mus.front());
  out.telescoping_gap = to_double(abs(log_sum - expected));
  return out;
}

void DprOptions::validate() const {
  plan.validate();
  if (replicas < 20) throw ConfigError("DPR needs at least 20 replicas");
  if (drivers < 1) throw ConfigError("DPR needs a positive driver count");
  if (max_attempts < 1) throw ConfigError("DPR needs at least one attempt per replica");
}

double empirical_p_value(double eta_real, const std::vector<double>& ensemble) {
  std::size_t hits = 0;
  for (double eta : ensemble) {
    if (eta >= eta_real) ++hits;
  }
  return static_cast<double>(1 + hits) / static_cast<double>(ensemble.size() + 1);
}

DprReport dpr_significance(const Network& net, const InputSet& inputs, const DprOptions& opts,
                           const PrecisionConfig& prec) {
  opts.validate();
  DprReport report;
  report.self_comparison = opts.self_comparison;
  report.replicas = opts.replicas;
  report.iterations = opts.self_comparison ? 0
                      : opts.iterations > 0 ? opts.iterations
                                            : default_swap_iterations(net);

  SamplingPlan real_plan = opts.plan;
  report.eta_real = fit_eta(sample_energies(net, inputs, real_plan, opts.horizon, prec)).eta;

  const auto r_count = static_cast<std::size_t>(opts.replicas);
  const DegreeSequence original = degree_sequence(net);
  std::vector<double> etas(r_count, kNaN);
  std::vector<char> preserved(r_count, 1);
  std::vector<std::size_t> attempts(r_count, 0);
  parallel_for(r_count, opts.plan.workers, [&](std::size_t r) {
    std::string last_error;
    for (int k = 0; k < opts.max_attempts; ++k) {
      const std::uint64_t s = derive_seed(opts.plan.seed, kReplicaStream + r, k);
      attempts[r] = static_cast<std::size_t>(k + 1);
      const Network replica =
          degree_preserving_randomize(net, report.iterations, derive_seed(s, 0));
      if (!(degree_sequence(replica) == original)) preserved[r] = 0;
      try {
        const InputSet drivers = select_drivers(replica, opts.drivers, derive_seed(s, 1));
        SamplingPlan plan = opts.plan;
        plan.seed = derive_seed(s, 2);
        plan.workers = 1;
        etas[r] = fit_eta(sample_energies(replica, drivers, plan, opts.horizon, prec)).eta;
        return;
      } catch (const ControllabilityError& e) {
        last_error = e.what();
      } catch (const NumericalError& e) {
        last_error = e.what();
      }
    }
    throw ControllabilityError("DPR replica " + std::to_string(r) + " failed after " +
                                   std::to_string(opts.max_attempts) +
                                   " attempts: " + last_error,
                               "");
  });
  report.eta_ensemble = etas;
  report.degrees_preserved =
      std::all_of(preserved.begin(), preserved.end(), [](char c) { return c != 0; });
  for (std::size_t a : attempts) report.attempts += a;
  report.p_value = empirical_p_value(report.eta_real, report.eta_ensemble);
  return report;
}

nlohmann::json DprReport::to_json() const {
  return {{"eta_real", eta_real},
          {"eta_ensemble", eta_ensemble},
          {"p_value", p_value},
          {"replicas", replicas},
          {"iterations", iterations},
          {"self_comparison", self_comparison},
          {"degrees_preserved", degrees_preserved},
          {"attempts", attempts}};
}

std::string DprReport::histogram_csv(int bins) const {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  if (eta_ensemble.empty() || bins < 1) return out.str();
  const auto [lo_it, hi_it] = std::minmax_element(eta_ensemble.begin(), eta_ensemble.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double eta : eta_ensemble) {
    auto b = static_cast<int>((eta - lo) / width);
    ++counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
  }
  for (int b = 0; b < bins; ++b) {
    out << format_g17(lo + b * width) << ',' << format_g17(lo + (b + 1) * width) << ','
        << counts[static_cast<std::size_t>(b)] << '\n';
  }
  return out.str();
}

EnergyTable sample_lq_energies(const Network& net, const InputSet& inputs, double zeta,
                               const SamplingPlan& plan, const Horizon& horizon,
                               const PrecisionConfig& prec) {
  plan.validate();
  inputs.validate(net.n);
  return with_precision(prec, [&]<typename Scalar>(std::type_identity<Scalar>) {
    const Eigen::MatrixXd b = build_input_matrix(inputs, net.n);
    const QuadraticCost cost = QuadraticCost::scaled_identity(net.n, inputs.size(), zeta);
    const RiccatiSolution care = solve_care(bar_matrices(net.adjacency(), b, cost));
    const ClosedLoop<Scalar> loop = closed_loop<Scalar>(b, care, prec);
    const Gramian<Scalar> full = compute_full_gramian(loop.decomp, loop.b_bar, horizon, prec);
    worst_case_energy(full, prec);
    const QuadratureRule rule = gauss_legendre(kDefaultQuadratureOrder, horizon.t0, horizon.tf);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(net.n);
    return sample_table(net.n, plan, [&](const TargetSet& targets) {
      using std::log10;
      const Gramian<Scalar> w = reduce(full, targets);
      const auto [mu, v] = smallest_symmetric_eigenpair(w.matrix);
      worst_case_energy(mu, prec);
      const VectorX<Scalar> z = v / mu;
      const LqEnergy<Scalar> e = lq_energy(loop, targets, v, z, x0, rule);
      if (!(e.total > 0)) throw NumericalError("non-positive LQ energy");
      return to_double(log10(e.total));
    });
  });
}

#define NETCTL_INSTANTIATE(S)                                                         \
  template EnergyTable sample_energies<S>(const Gramian<S>&, const SamplingPlan&,     \
                                          const PrecisionConfig&);                    \
  template EtaChain<S> eta_exact_chain<S>(const Gramian<S>&, const std::vector<TargetSet>&, \
                                          const PrecisionConfig&);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

}  // namespace netctl
