#pragma once

// Ensemble estimates of how the worst-case energy grows with the target
// fraction: sampled log E_max tables, the least-squares slope eta of
// <ln E_max> against p/n, exact step ratios along nested chains, and
// significance against degree-preserving randomizations.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "netctl/control_config.hpp"
#include "netctl/gramian.hpp"
#include "netctl/network.hpp"

namespace netctl {

/// Fractions 0.1, 0.2, ..., 1.0.
std::vector<double> default_fractions();

struct SamplingPlan {
  std::vector<double> fractions = default_fractions();
  int samples = 50;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

/// p = round(fraction n), clamped to [1, n].
Index target_size(Index n, double fraction);

/// log10 E_max per (fraction, sample). Failed samples hold NaN and are
/// counted in `failures`.
struct EnergyTable {
  Index n = 0;
  std::vector<double> fractions;
  std::vector<Index> sizes;
  std::vector<std::vector<double>> log10_energy;
  std::vector<std::size_t> failures;
  std::vector<std::string> failure_messages;
  std::uint64_t seed = 0;

  /// Pools another table over the same fractions (network realizations).
  void append(const EnergyTable& other);
};

/// Evaluates log10 of an energy for one target set; a ControllabilityError
/// marks the sample as failed.
using TargetEnergy = std::function<double(const TargetSet&)>;

/// Target set for sample s of fraction index f, drawn from the stream
/// derive_seed(seed, f, s). Shared by every experiment so that results for
/// the same seed see the same target sets.
TargetSet planned_target_set(Index n, Index p, std::uint64_t seed, std::size_t f,
                             std::size_t s);

EnergyTable sample_table(Index n, const SamplingPlan& plan, const TargetEnergy& energy);

/// Samples log10(1/mu_1) of principal submatrices of a full-state Gramian.
template <typename Scalar>
EnergyTable sample_energies(const Gramian<Scalar>& full, const SamplingPlan& plan,
                            const PrecisionConfig& prec);

/// Decomposes A, forms the full-state Gramian once, checks output
/// controllability of the full target set (ControllabilityError otherwise)
/// and samples it.
EnergyTable sample_energies(const Network& net, const InputSet& inputs,
                            const SamplingPlan& plan, const Horizon& horizon,
                            const PrecisionConfig& prec);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Ordinary least squares; ConfigError with fewer than two distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingResult {
  Index n = 0;
  std::vector<double> fractions;  // realized p/n, ascending
  std::vector<Index> sizes;
  std::vector<double> mean_log10_energy;
  std::vector<double> std_log10_energy;
  std::vector<std::size_t> successes;
  std::vector<std::size_t> failures;
  double eta = 0.0;        // slope of <ln E_max> against p/n
  double intercept = 0.0;  // natural-log intercept
  double r_squared = 1.0;
  int samples_per_point = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  /// "fraction,mean_log10_E,std_log10_E" rows.
  std::string to_csv() const;
};

/// Fits mean ln E_max = eta p/n + c over fractions with at least one
/// successful sample. ConfigError with fewer than three such fractions.
ScalingResult fit_eta(const EnergyTable& table);

template <typename Scalar>
struct EtaChain {
  std::vector<Index> sizes;           // decreasing, one node removed per step
  std::vector<Scalar> steps;          // eta_p = mu_1^(p) / mu_1^(p+1)
  std::vector<double> log_emax;       // ln(1/mu_1) per chain element
  Scalar geometric_mean;              // (prod eta_p)^(1/steps)
  double telescoping_gap = 0.0;       // |sum ln eta - (ln E_first - ln E_last)|
};

/// Step ratios along a nested chain, largest set first.
template <typename Scalar>
EtaChain<Scalar> eta_exact_chain(const Gramian<Scalar>& full, const std::vector<TargetSet>& chain,
                                 const PrecisionConfig& prec);

struct DprOptions {
  Index drivers = 0;          // driver count kept for every replica
  SamplingPlan plan;
  Horizon horizon;
  int replicas = 20;
  std::size_t iterations = 0;  // swaps per replica
  bool self_comparison = false;
  int max_attempts = 10;      // per replica

  void validate() const;
};

struct DprReport {
  double eta_real = 0.0;
  std::vector<double> eta_ensemble;
  double p_value = 1.0;
  int replicas = 0;
  std::size_t iterations = 0;
  bool self_comparison = false;
  bool degrees_preserved = true;
  std::size_t attempts = 0;

  nlohmann::json to_json() const;
  /// Histogram of eta_ensemble: "bin_lo,bin_hi,count".
  std::string histogram_csv(int bins = 10) const;
};

/// Add-one one-sided p-value (1 + #{eta_r >= eta_real}) / (R + 1).
double empirical_p_value(double eta_real, const std::vector<double>& ensemble);

/// eta of the network with the given drivers against `replicas` rewired
/// copies, each with freshly selected drivers of the same count. With
/// self_comparison the copies are not rewired.
DprReport dpr_significance(const Network& net, const InputSet& inputs, const DprOptions& opts,
                           const PrecisionConfig& prec);

/// Energy table of the LQ problem with Q = zeta I, M = 0, R = I: each sample
/// steers x0 = 0 to the worst-case unit direction of Wt_p.
EnergyTable sample_lq_energies(const Network& net, const InputSet& inputs, double zeta,
                               const SamplingPlan& plan, const Horizon& horizon,
                               const PrecisionConfig& prec);

struct ZetaRow {
  double zeta = 0.0;
  double eta = 0.0;
  double mean_log10_energy = 0.0;  // at the largest fraction
  double r_squared = 1.0;
};

}  // namespace netctl
