#include "netctl/control_config.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "netctl/error.hpp"
#include "netctl/gramian.hpp"
#include "netctl/random.hpp"

namespace netctl {
namespace {

void validate_nodes(const std::vector<Index>& nodes, Index n, const char* what) {
  std::set<Index> seen;
  for (Index v : nodes) {
    if (v < 0 || v >= n) {
      throw ConfigError(std::string(what) + " index " + std::to_string(v) +
                        " out of range [0, " + std::to_string(n) + ")");
    }
    if (!seen.insert(v).second) {
      throw ConfigError(std::string(what) + " index " + std::to_string(v) + " repeated");
    }
  }
}

}  // namespace

void InputSet::validate(Index n) const { validate_nodes(nodes, n, "input"); }
void TargetSet::validate(Index n) const { validate_nodes(nodes, n, "target"); }

SccDecomposition strongly_connected_components(const Network& net) {
  const auto adj = out_neighbors(net);
  const auto n = static_cast<std::size_t>(net.n);
  constexpr Index kUnvisited = -1;
  std::vector<Index> index(n, kUnvisited), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  SccDecomposition scc;
  scc.component.assign(n, kUnvisited);
  Index counter = 0;

  // Explicit DFS frames: (node, next neighbor position).
  std::vector<std::pair<Index, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.emplace_back(static_cast<Index>(root), 0);
    index[root] = low[root] = counter++;
    stack.push_back(static_cast<Index>(root));
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        const Index w = adj[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const Index done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const Index parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          scc.component[w] = scc.count;
        } while (w != done);
        ++scc.count;
      }
    }
  }
  return scc;
}

std::vector<std::vector<Index>> root_components(const Network& net) {
  const auto scc = strongly_connected_components(net);
  std::vector<bool> has_incoming(static_cast<std::size_t>(scc.count), false);
  for (const auto& e : net.edges) {
    const Index cs = scc.component[e.src];
    const Index cd = scc.component[e.dst];
    if (cs != cd) has_incoming[cd] = true;
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(scc.count));
  for (Index v = 0; v < net.n; ++v) members[scc.component[v]].push_back(v);
  std::vector<std::vector<Index>> roots;
  for (Index c = 0; c < scc.count; ++c) {
    if (!has_incoming[c]) roots.push_back(members[c]);
  }
  // Order by smallest member for a seed-independent layout.
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return roots;
}

bool reaches_all(const Network& net, const std::vector<Index>& sources) {
  const auto adj = out_neighbors(net);
  std::vector<bool> seen(static_cast<std::size_t>(net.n), false);
  std::vector<Index> frontier;
  for (Index s : sources) {
    if (!seen[s]) {
      seen[s] = true;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const Index v = frontier.back();
    frontier.pop_back();
    for (Index w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        frontier.push_back(w);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

Index driver_count(Index n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("driver fraction must lie in (0, 1]");
  }
  return std::max<Index>(1, static_cast<Index>(std::llround(fraction * n)));
}

InputSet select_drivers(const Network& net, Index m, std::uint64_t seed) {
  if (m > net.n) throw ConfigError("more drivers requested than nodes");
  const auto roots = root_components(net);
  if (m < static_cast<Index>(roots.size())) {
    throw ConfigError("need at least " + std::to_string(roots.size()) +
                      " drivers (one per root component), got " + std::to_string(m));
  }
  Rng rng(seed);
  std::vector<bool> chosen(static_cast<std::size_t>(net.n), false);
  InputSet inputs;
  for (const auto& comp : roots) {
    std::uniform_int_distribution<std::size_t> pick(0, comp.size() - 1);
    const Index v = comp[pick(rng)];
    chosen[v] = true;
    inputs.nodes.push_back(v);
  }
  std::vector<Index> rest;
  for (Index v = 0; v < net.n; ++v) {
    if (!chosen[v]) rest.push_back(v);
  }
  // Partial Fisher-Yates over the non-drivers.
  const auto extra = static_cast<std::size_t>(m) - inputs.nodes.size();
  for (std::size_t k = 0; k < extra; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, rest.size() - 1);
    std::swap(rest[k], rest[pick(rng)]);
    inputs.nodes.push_back(rest[k]);
  }
  std::sort(inputs.nodes.begin(), inputs.nodes.end());
  return inputs;
}

Eigen::MatrixXd build_input_matrix(const InputSet& inputs, Index n) {
  inputs.validate(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, inputs.size());
  for (Index j = 0; j < inputs.size(); ++j) b(inputs.nodes[j], j) = 1.0;
  return b;
}

Eigen::MatrixXd build_output_matrix(const TargetSet& targets, Index n) {
  targets.validate(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(targets.size(), n);
  for (Index i = 0; i < targets.size(); ++i) c(i, targets.nodes[i]) = 1.0;
  return c;
}

TargetSet sample_target_set(Index n, Index p, std::uint64_t seed) {
  if (p < 1 || p > n) {
    throw ConfigError("target count " + std::to_string(p) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index k = 0; k < p; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(order[k], order[pick(rng)]);
  }
  TargetSet targets{{order.begin(), order.begin() + p}};
  std::sort(targets.nodes.begin(), targets.nodes.end());
  return targets;
}

std::vector<TargetSet> sample_nested_chain(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<TargetSet> chain;
  chain.reserve(order.size());
  for (Index k = 1; k <= n; ++k) chain.push_back({{order.begin(), order.begin() + k}});
  return chain;
}

ControllabilityReport output_controllability_check(const Network& net,
                                                   const InputSet& inputs,
                                                   const TargetSet& targets,
                                                   const Horizon& horizon,
                                                   const PrecisionConfig& prec) {
  return with_precision(prec, [&]<typename Scalar>(std::type_identity<Scalar>) {
    const auto decomp = eig_decompose<Scalar>(net.adjacency(), prec);
    const auto gram =
        compute_gramian(decomp, build_input_matrix(inputs, net.n), targets, horizon, prec);
    const Scalar mu1 = smallest_eigenvalue(gram);
    const Scalar threshold = prec.zero_threshold<Scalar>();
    ControllabilityReport report;
    report.controllable = mu1 > threshold;
    report.mu1 = to_double(mu1);
    report.mu1_decimal = to_decimal_string(mu1, prec.digits);
    report.threshold_decimal = to_decimal_string(threshold, 4);
    return report;
  });
}

}  // namespace netctl
