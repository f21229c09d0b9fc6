#include "netctl/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <Eigen/Eigenvalues>

#include "netctl/error.hpp"
#include "netctl/random.hpp"

namespace netctl {
namespace {

std::uint64_t edge_key(Index src, Index dst, Index n) {
  return static_cast<std::uint64_t>(src) * static_cast<std::uint64_t>(n) +
         static_cast<std::uint64_t>(dst);
}

std::vector<double> static_model_weights(Index n, double gamma) {
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);
  if (std::isinf(gamma)) return w;
  const double alpha = 1.0 / (gamma - 1.0);
  for (Index i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), -alpha);
  return w;
}

void check_exponent(double gamma, const char* name) {
  if (std::isinf(gamma) && gamma > 0) return;
  if (!(gamma > 2.0)) {
    throw ConfigError(std::string(name) + " must exceed 2 or be infinite, got " +
                      std::to_string(gamma));
  }
}

Eigen::VectorXd draw_distinct_noise(Index n, Rng& rng) {
  constexpr int kRetries = 100;
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::unordered_set<double> seen;
  Eigen::VectorXd delta(n);
  for (Index i = 0; i < n; ++i) {
    int tries = 0;
    double d = noise(rng);
    while (seen.count(d) != 0) {
      if (++tries > kRetries) {
        throw GenerationError("could not draw distinct diagonal noise for node " +
                              std::to_string(i));
      }
      d = noise(rng);
    }
    seen.insert(d);
    delta(i) = d;
  }
  return delta;
}

std::string trim_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::int64_t parse_id(const std::string& token, int line_no) {
  std::int64_t value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw GenerationError("line " + std::to_string(line_no) + ": node id overflow '" +
                          token + "'");
  }
  if (ec != std::errc() || ptr != last || value < 0) {
    throw GenerationError("line " + std::to_string(line_no) + ": malformed node id '" +
                          token + "'");
  }
  return value;
}

double parse_weight(const std::string& token, int line_no) {
  std::size_t used = 0;
  double w = 0.0;
  try {
    w = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(w)) {
    throw GenerationError("line " + std::to_string(line_no) + ": malformed weight '" +
                          token + "'");
  }
  return w;
}

}  // namespace

Eigen::MatrixXd Network::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) a(e.dst, e.src) = e.weight;
  if (weighted()) a.diagonal() = diagonal();
  return a;
}

DegreeSequence degree_sequence(const Network& net) {
  DegreeSequence seq;
  seq.in_degrees.assign(static_cast<std::size_t>(net.n), 0);
  seq.out_degrees.assign(static_cast<std::size_t>(net.n), 0);
  for (const auto& e : net.edges) {
    ++seq.in_degrees[e.dst];
    ++seq.out_degrees[e.src];
  }
  seq.average = net.n > 0 ? static_cast<double>(net.edges.size()) / net.n : 0.0;
  return seq;
}

std::vector<std::vector<Index>> out_neighbors(const Network& net) {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(net.n));
  for (const auto& e : net.edges) out[e.src].push_back(e.dst);
  return out;
}

Network generate_static(Index n, double gamma_in, double gamma_out, double k_av,
                        std::uint64_t seed) {
  if (n < 2) throw ConfigError("static model needs n >= 2");
  check_exponent(gamma_in, "gamma_in");
  check_exponent(gamma_out, "gamma_out");
  if (!(k_av > 0.0)) throw ConfigError("k_av must be positive");

  const auto target = static_cast<std::size_t>(std::llround(n * k_av));
  const auto capacity = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1);
  if (target > capacity) {
    throw GenerationError("requested " + std::to_string(target) +
                          " edges exceed simple-graph capacity " +
                          std::to_string(capacity));
  }

  const auto w_out = static_model_weights(n, gamma_out);
  const auto w_in = static_model_weights(n, gamma_in);
  std::discrete_distribution<Index> pick_src(w_out.begin(), w_out.end());
  std::discrete_distribution<Index> pick_dst(w_in.begin(), w_in.end());

  Rng rng(seed);
  Network net;
  net.n = n;
  net.meta.gamma_in = gamma_in;
  net.meta.gamma_out = gamma_out;
  net.meta.k_av = k_av;
  net.meta.seed = seed;
  net.meta.source = "static";
  net.edges.reserve(target);

  std::unordered_set<std::uint64_t> present;
  const std::size_t max_attempts = 1000 * target + 100000;
  std::size_t attempts = 0;
  while (net.edges.size() < target) {
    if (++attempts > max_attempts) {
      throw GenerationError("static model rejection sampling did not converge after " +
                            std::to_string(max_attempts) + " draws (" +
                            std::to_string(net.edges.size()) + "/" +
                            std::to_string(target) + " edges)");
    }
    const Index src = pick_src(rng);
    const Index dst = pick_dst(rng);
    if (src == dst) continue;
    if (!present.insert(edge_key(src, dst, n)).second) continue;
    net.edges.push_back({src, dst, 1.0});
  }
  return net;
}

Network assign_weights(const Network& net, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  Network out = net;
  for (auto& e : out.edges) e.weight = weight(rng);
  out.noise = draw_distinct_noise(net.n, rng);
  out.shift = 0.0;
  return out;
}

Network assign_noise(const Network& net, std::uint64_t seed) {
  Rng rng(seed);
  Network out = net;
  out.noise = draw_distinct_noise(net.n, rng);
  out.shift = 0.0;
  return out;
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed on the adjacency matrix");
  }
  return es.eigenvalues().real().maxCoeff();
}

Network stabilize(const Network& net) {
  if (!net.weighted()) throw ConfigError("stabilize requires assigned diagonal noise");
  Network out = net;
  out.shift = 0.0;
  out.shift = -1.0 - spectral_abscissa(out.adjacency());
  return out;
}

Network degree_preserving_randomize(const Network& net, std::size_t iterations,
                                    std::uint64_t seed, RandomizeStats* stats) {
  if (iterations == 0) {
    if (stats != nullptr) *stats = {};
    return net;
  }
  if (net.edges.size() < 2) {
    throw ConfigError("degree-preserving randomization needs at least two edges");
  }
  Rng rng(derive_seed(seed, 0));
  Network out = net;
  auto& edges = out.edges;
  std::unordered_set<std::uint64_t> present;
  for (const auto& e : edges) present.insert(edge_key(e.src, e.dst, net.n));

  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  const std::size_t max_attempts = 100 * iterations + 1000;
  RandomizeStats local;
  while (local.accepted < iterations && local.attempted < max_attempts) {
    ++local.attempted;
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    if (i == j) continue;
    Edge& e1 = edges[i];
    Edge& e2 = edges[j];
    if (e1.dst == e2.dst) continue;
    if (e1.src == e2.dst || e2.src == e1.dst) continue;
    const auto k1 = edge_key(e1.src, e2.dst, net.n);
    const auto k2 = edge_key(e2.src, e1.dst, net.n);
    if (present.count(k1) != 0 || present.count(k2) != 0) continue;
    present.erase(edge_key(e1.src, e1.dst, net.n));
    present.erase(edge_key(e2.src, e2.dst, net.n));
    present.insert(k1);
    present.insert(k2);
    std::swap(e1.dst, e2.dst);
    ++local.accepted;
  }
  if (stats != nullptr) *stats = local;

  out.meta.source = "randomized";
  out.meta.seed = seed;
  return stabilize(assign_noise(out, derive_seed(seed, 1)));
}

EdgeListLoad load_edge_list(std::istream& source, bool directed, std::uint64_t seed,
                            const std::string& name) {
  struct RawEdge {
    std::int64_t src;
    std::int64_t dst;
    std::optional<double> weight;
  };
  EdgeListLoad result;
  std::vector<RawEdge> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    std::istringstream tokens(trim_comment(line));
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty()) continue;
    if (fields.size() < 2 || fields.size() > 3) {
      throw GenerationError("line " + std::to_string(line_no) +
                            ": expected 'src dst [weight]'");
    }
    RawEdge e{parse_id(fields[0], line_no), parse_id(fields[1], line_no), std::nullopt};
    if (fields.size() == 3) e.weight = parse_weight(fields[2], line_no);
    raw.push_back(e);
  }
  if (raw.empty()) throw GenerationError("edge list '" + name + "' has no edges");

  std::vector<std::int64_t> ids;
  ids.reserve(2 * raw.size());
  for (const auto& e : raw) {
    ids.push_back(e.src);
    ids.push_back(e.dst);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  result.id_base = ids.front() == 0 ? 0 : 1;
  std::map<std::int64_t, Index> index_of;
  for (std::size_t i = 0; i < ids.size(); ++i) index_of[ids[i]] = static_cast<Index>(i);

  Network& net = result.network;
  net.n = static_cast<Index>(ids.size());
  net.meta.source = "edge_list:" + name;
  net.meta.seed = seed;
  net.meta.labels = ids;
  net.meta.k_av = 0.0;

  Rng rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::unordered_set<std::uint64_t> present;
  auto add = [&](std::int64_t s, std::int64_t d, double w) {
    const Index src = index_of.at(s);
    const Index dst = index_of.at(d);
    if (!present.insert(edge_key(src, dst, net.n)).second) {
      result.warnings.push_back("duplicate edge " + std::to_string(s) + " -> " +
                                std::to_string(d) + " ignored");
      return;
    }
    net.edges.push_back({src, dst, w});
  };
  for (const auto& e : raw) {
    if (e.src == e.dst) {
      result.warnings.push_back("self-loop on node " + std::to_string(e.src) + " ignored");
      continue;
    }
    const double w = e.weight ? *e.weight : weight(rng);
    add(e.src, e.dst, w);
    if (!directed) add(e.dst, e.src, w);
  }
  net.meta.k_av = static_cast<double>(net.edges.size()) / net.n;
  net.noise = draw_distinct_noise(net.n, rng);
  result.network = stabilize(net);
  return result;
}

Network make_static_network(Index n, double gamma_in, double gamma_out, double k_av,
                            std::uint64_t seed) {
  Network topology = generate_static(n, gamma_in, gamma_out, k_av, derive_seed(seed, 0));
  topology.meta.seed = seed;
  return stabilize(assign_weights(topology, derive_seed(seed, 1)));
}

namespace {

nlohmann::json exponent_to_json(double gamma) {
  if (std::isinf(gamma)) return "inf";
  return gamma;
}

double exponent_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return NetworkMeta::kInfinity;
    throw ConfigError("exponent must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const Network& net) {
  nlohmann::json doc;
  doc["n"] = net.n;
  auto& edges = doc["edges"] = nlohmann::json::array();
  for (const auto& e : net.edges) edges.push_back({e.src, e.dst, e.weight});
  const Eigen::VectorXd diag = net.weighted() ? net.diagonal() : Eigen::VectorXd();
  doc["diag"] = std::vector<double>(diag.data(), diag.data() + diag.size());
  doc["noise"] = std::vector<double>(net.noise.data(), net.noise.data() + net.noise.size());
  doc["meta"] = {
      {"gamma_in", exponent_to_json(net.meta.gamma_in)},
      {"gamma_out", exponent_to_json(net.meta.gamma_out)},
      {"k_av", net.meta.k_av},
      {"seed", net.meta.seed},
      {"source", net.meta.source},
      {"shift", net.shift},
  };
  if (!net.meta.labels.empty()) doc["meta"]["labels"] = net.meta.labels;
  return doc;
}

Network network_from_json(const nlohmann::json& doc) {
  try {
    Network net;
    net.n = doc.at("n").get<Index>();
    for (const auto& e : doc.at("edges")) {
      Edge edge{e.at(0).get<Index>(), e.at(1).get<Index>(), e.at(2).get<double>()};
      if (edge.src < 0 || edge.dst < 0 || edge.src >= net.n || edge.dst >= net.n ||
          edge.src == edge.dst) {
        throw ConfigError("network JSON has an invalid edge");
      }
      net.edges.push_back(edge);
    }
    const auto& meta = doc.at("meta");
    net.shift = meta.value("shift", 0.0);
    if (doc.contains("noise") && !doc.at("noise").empty()) {
      const auto noise = doc.at("noise").get<std::vector<double>>();
      net.noise = Eigen::Map<const Eigen::VectorXd>(noise.data(), noise.size());
    } else if (doc.contains("diag") && !doc.at("diag").empty()) {
      const auto diag = doc.at("diag").get<std::vector<double>>();
      net.noise = Eigen::Map<const Eigen::VectorXd>(diag.data(), diag.size()).array() -
                  net.shift;
    }
    if (net.noise.size() != 0 && net.noise.size() != net.n) {
      throw ConfigError("network JSON diagonal length does not match n");
    }
    net.meta.gamma_in = exponent_from_json(meta.at("gamma_in"));
    net.meta.gamma_out = exponent_from_json(meta.at("gamma_out"));
    net.meta.k_av = meta.value("k_av", 0.0);
    net.meta.seed = meta.value("seed", std::uint64_t{0});
    net.meta.source = meta.value("source", std::string("json"));
    if (meta.contains("labels")) {
      net.meta.labels = meta.at("labels").get<std::vector<std::int64_t>>();
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed network JSON: ") + e.what());
  }
}

}  // namespace netctl
