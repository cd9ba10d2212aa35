#include "dsm/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "dsm/error.hpp"
#include "dsm/rng.hpp"

namespace dsm {

Topology Topology::from_edges(int num_agents, std::vector<Edge> edges) {
  if (num_agents < 1) {
    throw InvalidTopology("topology needs at least one agent, got " + std::to_string(num_agents));
  }
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= num_agents || j >= num_agents) {
      throw InvalidTopology("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") out of range for " + std::to_string(num_agents) + " agents");
    }
    if (i == j) throw InvalidTopology("self-loop at agent " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw InvalidTopology("duplicate edge (" + std::to_string(dup->first) + ", " +
                          std::to_string(dup->second) + ")");
  }

  Topology t;
  t.num_agents_ = num_agents;
  t.edges_ = std::move(edges);
  t.adjacency_.assign(num_agents, {});
  for (const auto& [i, j] : t.edges_) {
    t.adjacency_[i].push_back(j);
    t.adjacency_[j].push_back(i);
  }
  for (auto& nbrs : t.adjacency_) std::sort(nbrs.begin(), nbrs.end());
  return t;
}

int Topology::max_degree() const noexcept {
  int best = 0;
  for (const auto& nbrs : adjacency_) best = std::max(best, static_cast<int>(nbrs.size()));
  return best;
}

bool Topology::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

namespace {

void require_at_least_two(int d) {
  if (d < 2) throw InvalidTopology("need d >= 2 agents, got " + std::to_string(d));
}

// Decodes a Pruefer sequence of length d-2 into the edges of a labelled tree.
std::vector<Edge> pruefer_tree(int d, CounterRng& rng) {
  if (d == 2) return {{0, 1}};
  std::vector<int> seq(d - 2);
  for (auto& s : seq) s = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d)));

  std::vector<int> degree(d, 1);
  for (int s : seq) ++degree[s];

  std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
  for (int v = 0; v < d; ++v)
    if (degree[v] == 1) leaves.push(v);

  std::vector<Edge> edges;
  edges.reserve(d - 1);
  for (int s : seq) {
    const int leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, s);
    if (--degree[s] == 1) leaves.push(s);
  }
  const int u = leaves.top();
  leaves.pop();
  edges.emplace_back(u, leaves.top());
  return edges;
}

}  // namespace

Topology build_ring(int d) {
  require_at_least_two(d);
  if (d == 2) return Topology::from_edges(2, {{0, 1}});
  std::vector<Edge> edges;
  edges.reserve(d);
  for (int i = 0; i < d; ++i) edges.emplace_back(i, (i + 1) % d);
  return Topology::from_edges(d, std::move(edges));
}

Topology build_complete(int d) {
  require_at_least_two(d);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) edges.emplace_back(i, j);
  return Topology::from_edges(d, std::move(edges));
}

Topology build_random_connected(int d, double edge_prob, std::uint64_t seed) {
  require_at_least_two(d);
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw InvalidParameter("edge_prob must lie in [0, 1], got " + std::to_string(edge_prob));
  }
  CounterRng rng(seed, kTopologyStream);
  std::vector<Edge> edges = pruefer_tree(d, rng);
  for (auto& [i, j] : edges)
    if (i > j) std::swap(i, j);
  std::sort(edges.begin(), edges.end());

  std::vector<Edge> extra;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      // One draw per pair regardless of tree membership keeps the stream
      // layout independent of the tree.
      const bool keep = rng.uniform01() < edge_prob;
      if (keep && !std::binary_search(edges.begin(), edges.end(), Edge{i, j})) {
        extra.emplace_back(i, j);
      }
    }
  }
  edges.insert(edges.end(), extra.begin(), extra.end());
  return Topology::from_edges(d, std::move(edges));
}

bool is_connected(const Topology& t) {
  const int d = t.num_agents();
  std::vector<char> seen(d, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : t.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == d;
}

Topology topology_from_json(const nlohmann::json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  const int d = spec.at("d").get<int>();
  if (kind == "ring") return build_ring(d);
  if (kind == "complete") return build_complete(d);
  if (kind == "random") {
    return build_random_connected(d, spec.at("edge_prob").get<double>(),
                                  spec.value("seed", std::uint64_t{0}));
  }
  if (kind == "edges") {
    const int base = spec.value("index_base", 0);
    if (base != 0 && base != 1) throw InvalidParameter("index_base must be 0 or 1");
    std::vector<Edge> edges;
    for (const auto& e : spec.at("edges")) {
      edges.emplace_back(e.at(0).get<int>() - base, e.at(1).get<int>() - base);
    }
    return Topology::from_edges(d, std::move(edges));
  }
  throw InvalidParameter("unknown topology kind '" + kind + "'");
}

nlohmann::json topology_to_json(const Topology& t) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : t.edges()) edges.push_back({i, j});
  return {{"kind", "edges"}, {"d", t.num_agents()}, {"edges", edges}};
}

}  // namespace dsm
