#pragma once

// Driver and target node selection, versor input/output matrices, and the
// output-controllability probe.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "netctl/network.hpp"
#include "netctl/precision.hpp"

namespace netctl {

/// Driver nodes; each receives one independent control signal.
struct InputSet {
  std::vector<Index> nodes;

  Index size() const { return static_cast<Index>(nodes.size()); }
  void validate(Index n) const;
};

/// Target nodes whose final state is prescribed, in row order of C.
struct TargetSet {
  std::vector<Index> nodes;

  Index size() const { return static_cast<Index>(nodes.size()); }
  void validate(Index n) const;
};

/// Strongly connected components (Tarjan, iterative). component[i] is the
/// component id of node i; ids are in reverse topological order of the
/// condensation.
struct SccDecomposition {
  std::vector<Index> component;
  Index count = 0;
};
SccDecomposition strongly_connected_components(const Network& net);

/// Components without incoming edges from other components.
std::vector<std::vector<Index>> root_components(const Network& net);

/// One driver per root component, then uniformly random extra nodes up to
/// m. Every node is reachable from the result. Sorted ascending.
InputSet select_drivers(const Network& net, Index m, std::uint64_t seed);

/// Driver count from a fraction n_d of the node count, at least one.
Index driver_count(Index n, double fraction);

/// True if every node is reachable from `sources` along edge directions.
bool reaches_all(const Network& net, const std::vector<Index>& sources);

/// n x m matrix with B(inputs[j], j) = 1.
Eigen::MatrixXd build_input_matrix(const InputSet& inputs, Index n);

/// p x n matrix with C(i, targets[i]) = 1.
Eigen::MatrixXd build_output_matrix(const TargetSet& targets, Index n);

/// Uniform sample of p nodes without replacement, sorted ascending.
TargetSet sample_target_set(Index n, Index p, std::uint64_t seed);

/// Nested sets P_1 c P_2 c ... c P_n defined by a random node order;
/// element k-1 holds the first k nodes of that order.
std::vector<TargetSet> sample_nested_chain(Index n, std::uint64_t seed);

struct Horizon {
  double t0 = 0.0;
  double tf = 1.0;

  double length() const { return tf - t0; }
};

struct ControllabilityReport {
  bool controllable = false;
  double mu1 = 0.0;
  std::string mu1_decimal;
  std::string threshold_decimal;
};

/// Output controllability of (A, B, C) via the smallest eigenvalue of the
/// reduced Gramian, computed at the requested precision and compared with
/// 10^(-digits/2).
ControllabilityReport output_controllability_check(const Network& net,
                                                   const InputSet& inputs,
                                                   const TargetSet& targets,
                                                   const Horizon& horizon,
                                                   const PrecisionConfig& prec);

}  // namespace netctl
