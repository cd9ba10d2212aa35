#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace dsm {

using Edge = std::pair<int, int>;

/// Undirected simple graph over agents 0..d-1. Edges are stored as sorted
/// pairs (i < j) in lexicographic order; construction rejects self-loops,
/// duplicates and out-of-range endpoints. Connectivity is not enforced
/// here (see is_connected); the builders below always return connected
/// graphs and the mixing builders reject disconnected ones.
class Topology {
 public:
  static Topology from_edges(int num_agents, std::vector<Edge> edges);

  int num_agents() const noexcept { return num_agents_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& neighbors(int agent) const { return adjacency_.at(agent); }
  int degree(int agent) const { return static_cast<int>(adjacency_.at(agent).size()); }
  int max_degree() const noexcept;
  bool has_edge(int i, int j) const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.num_agents_ == b.num_agents_ && a.edges_ == b.edges_;
  }

 private:
  Topology() = default;

  int num_agents_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

Topology build_ring(int d);
Topology build_complete(int d);

/// Erdos-Renyi G(d, p) unioned with a uniformly random labelled spanning
/// tree (decoded from a random Pruefer sequence). Deterministic in seed.
Topology build_random_connected(int d, double edge_prob, std::uint64_t seed);

bool is_connected(const Topology& t);

/// Config block: {"kind": "ring"|"complete"|"random", "d", "edge_prob", "seed"}
/// or {"kind": "edges", "d", "edges": [[i, j], ...], "index_base": 0|1}.
Topology topology_from_json(const nlohmann::json& spec);
nlohmann::json topology_to_json(const Topology& t);

}  // namespace dsm
