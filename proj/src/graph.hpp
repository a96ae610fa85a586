#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace nee {

// Undirected weighted graph. Weights are positive and fit the task's number
// system; self-loops are rejected, parallel edges collapse to one.
struct WeightedGraph {
  struct Edge {
    int u = 0;
    int v = 0;
    uint32_t w = 1;
  };

  int n = 0;
  std::vector<Edge> edges;

  void validate() const;
  // adjacency[u] = sorted list of (neighbor, weight)
  std::vector<std::vector<std::pair<int, uint32_t>>> adjacency() const;
  // Induced subgraph of the connected component containing `node`, nodes
  // relabeled in increasing original order; mapping returned alongside.
  WeightedGraph component_of(int node, std::vector<int>* original_ids = nullptr) const;
  bool connected() const;
};

enum class GraphFamily { ErdosRenyi, NewmanWattsStrogatz, DRegular, BarabasiAlbert };

GraphFamily graph_family_from_string(const std::string& s);
std::string graph_family_name(GraphFamily f);

struct GraphParams {
  double p = 0.5;  // ER edge probability / NWS shortcut probability
  int k = 4;       // NWS ring degree, 2..5
  int d = 3;       // regular degree, 2..n with n*d even
  int m = 2;       // BA attachment edges, 2..5
};

// Topology only; weights are assigned separately.
WeightedGraph gen_graph_topology(GraphFamily family, int size,
                                 const GraphParams& params, Rng& rng);

// Assigns integer weights so that no sum evaluated by shortest-path traversal
// from `source` overflows [0, 2^width - 1]. close_spread > 0 draws weights
// from a narrow band (hard examples).
void assign_weights(WeightedGraph& g, int source, uint32_t width, Rng& rng,
                    uint32_t close_spread = 0);

WeightedGraph gen_graph(GraphFamily family, int size, const GraphParams& params,
                        uint64_t seed, int source, uint32_t width,
                        bool hard_weights);

}  // namespace nee
