#pragma once

// Network construction: the static scale-free model, weight and diagonal
// assignment, spectral stabilization, degree-preserving randomization and
// edge-list ingestion.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace netctl {

using Index = Eigen::Index;

/// Directed edge src -> dst. In the adjacency matrix it lands at (dst, src).
struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct NetworkMeta {
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  double gamma_in = kInfinity;
  double gamma_out = kInfinity;
  double k_av = 0.0;
  std::uint64_t seed = 0;
  /// "static", "edge_list:<name>", "randomized", ...
  std::string source = "static";
  /// Original node ids for ingested networks; empty means ids are indices.
  std::vector<std::int64_t> labels;
};

/// Directed weighted network with a stabilized diagonal:
///   a_ij = weight of edge j -> i,   a_ii = noise_i + shift.
/// Self-dynamics live only on the diagonal; `edges` holds no self-loops.
struct Network {
  Index n = 0;
  std::vector<Edge> edges;
  Eigen::VectorXd noise;  // per-node delta_i
  double shift = 0.0;     // epsilon
  NetworkMeta meta;

  Eigen::MatrixXd adjacency() const;
  Eigen::VectorXd diagonal() const { return noise.array() + shift; }
  bool weighted() const { return noise.size() == n; }
};

struct DegreeSequence {
  std::vector<Index> in_degrees;
  std::vector<Index> out_degrees;
  double average = 0.0;

  friend bool operator==(const DegreeSequence& a, const DegreeSequence& b) {
    return a.in_degrees == b.in_degrees && a.out_degrees == b.out_degrees;
  }
};

DegreeSequence degree_sequence(const Network& net);

/// Directed static model. Node i (1-based) carries weights i^(-1/(gamma-1))
/// for each direction; an infinite exponent gives uniform weights, i.e. the
/// Erdos-Renyi limit. Produces exactly round(n * k_av) simple directed edges
/// with unit weights and no diagonal.
Network generate_static(Index n, double gamma_in, double gamma_out, double k_av,
                        std::uint64_t seed);

/// Edge weights ~ U(0.5, 1.5); pairwise distinct noise delta_i ~ U(-1, 1).
Network assign_weights(const Network& net, std::uint64_t seed);

/// Draws only the diagonal noise, keeping edge weights.
Network assign_noise(const Network& net, std::uint64_t seed);

/// Chooses the shift so that the largest real part of the spectrum is -1.
Network stabilize(const Network& net);

/// Largest real part of the eigenvalues of the adjacency matrix.
double spectral_abscissa(const Eigen::MatrixXd& a);

/// Default accepted-swap count for randomization: 10 |E|.
inline std::size_t default_swap_iterations(const Network& net) {
  return 10 * net.edges.size();
}

struct RandomizeStats {
  std::size_t accepted = 0;
  std::size_t attempted = 0;
};

/// Degree-preserving randomization by receiver swaps: edges (a->b), (c->d)
/// become (a->d), (c->b), each keeping its source's weight. Swaps creating
/// self-loops or duplicates are rejected. The result is re-noised and
/// re-stabilized. `iterations == 0` returns the network unchanged.
Network degree_preserving_randomize(const Network& net, std::size_t iterations,
                                    std::uint64_t seed,
                                    RandomizeStats* stats = nullptr);

struct EdgeListLoad {
  Network network;
  std::vector<std::string> warnings;
  /// 0 or 1, detected from the smallest id.
  int id_base = 0;
};

/// Parses "src dst [weight]" lines ('#' starts a comment). Ids are mapped to
/// dense indices in ascending id order with the original ids kept in
/// meta.labels. Missing weights and the diagonal are drawn from `seed` as for
/// generated networks, then the network is stabilized.
EdgeListLoad load_edge_list(std::istream& source, bool directed, std::uint64_t seed,
                            const std::string& name = "stream");

/// Full pipeline: generate, weight, stabilize.
Network make_static_network(Index n, double gamma_in, double gamma_out, double k_av,
                            std::uint64_t seed);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc);

/// Adjacency lists for graph traversal: out_neighbors[j] lists i with j -> i.
std::vector<std::vector<Index>> out_neighbors(const Network& net);

}  // namespace netctl
