#include "graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace nee {

void WeightedGraph::validate() const {
  if (n <= 0) fail(ErrorKind::InvalidArgument, "graph must have nodes");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      fail(ErrorKind::InvalidArgument, "graph edge endpoint out of range");
    }
    if (e.u == e.v) fail(ErrorKind::InvalidArgument, "graph has a self-loop");
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert({key.first, key.second}).second) {
      fail(ErrorKind::InvalidArgument, "graph has a duplicate edge");
    }
    if (e.w == 0) fail(ErrorKind::InvalidArgument, "graph edge weight is zero");
  }
}

std::vector<std::vector<std::pair<int, uint32_t>>> WeightedGraph::adjacency()
    const {
  std::vector<std::vector<std::pair<int, uint32_t>>> adj(
      static_cast<size_t>(n));
  for (const Edge& e : edges) {
    adj[static_cast<size_t>(e.u)].push_back({e.v, e.w});
    adj[static_cast<size_t>(e.v)].push_back({e.u, e.w});
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

WeightedGraph WeightedGraph::component_of(int node,
                                          std::vector<int>* original_ids) const {
  if (node < 0 || node >= n) {
    fail(ErrorKind::InvalidArgument, "component_of: node out of range");
  }
  auto adj = adjacency();
  std::vector<bool> in(static_cast<size_t>(n), false);
  std::queue<int> q;
  q.push(node);
  in[static_cast<size_t>(node)] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, w] : adj[static_cast<size_t>(u)]) {
      (void)w;
      if (!in[static_cast<size_t>(v)]) {
        in[static_cast<size_t>(v)] = true;
        q.push(v);
      }
    }
  }
  std::vector<int> ids;
  std::vector<int> relabel(static_cast<size_t>(n), -1);
  for (int u = 0; u < n; ++u) {
    if (in[static_cast<size_t>(u)]) {
      relabel[static_cast<size_t>(u)] = static_cast<int>(ids.size());
      ids.push_back(u);
    }
  }
  WeightedGraph sub;
  sub.n = static_cast<int>(ids.size());
  for (const Edge& e : edges) {
    if (in[static_cast<size_t>(e.u)] && in[static_cast<size_t>(e.v)]) {
      sub.edges.push_back({relabel[static_cast<size_t>(e.u)],
                           relabel[static_cast<size_t>(e.v)], e.w});
    }
  }
  if (original_ids) *original_ids = std::move(ids);
  return sub;
}

bool WeightedGraph::connected() const {
  if (n == 0) return false;
  std::vector<int> ids;
  WeightedGraph c = component_of(0, &ids);
  return c.n == n;
}

GraphFamily graph_family_from_string(const std::string& s) {
  if (s == "er" || s == "erdos-renyi") return GraphFamily::ErdosRenyi;
  if (s == "nws" || s == "newman-watts-strogatz") {
    return GraphFamily::NewmanWattsStrogatz;
  }
  if (s == "regular" || s == "d-regular") return GraphFamily::DRegular;
  if (s == "ba" || s == "barabasi-albert") return GraphFamily::BarabasiAlbert;
  fail(ErrorKind::InvalidArgument, "unknown graph family '" + s + "'");
}

std::string graph_family_name(GraphFamily f) {
  switch (f) {
    case GraphFamily::ErdosRenyi: return "erdos-renyi";
    case GraphFamily::NewmanWattsStrogatz: return "newman-watts-strogatz";
    case GraphFamily::DRegular: return "d-regular";
    case GraphFamily::BarabasiAlbert: return "barabasi-albert";
  }
  return "unknown";
}

namespace {

void add_edge_unique(std::set<std::pair<int, int>>& seen,
                     std::vector<WeightedGraph::Edge>& edges, int u, int v) {
  if (u == v) return;
  auto key = std::minmax(u, v);
  if (seen.insert({key.first, key.second}).second) {
    edges.push_back({key.first, key.second, 1});
  }
}

WeightedGraph gen_erdos_renyi(int n, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) {
    fail(ErrorKind::InvalidArgument, "erdos-renyi: p must be in [0,1]");
  }
  WeightedGraph g;
  g.n = n;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) g.edges.push_back({u, v, 1});
    }
  }
  return g;
}

WeightedGraph gen_nws(int n, int k, double p, Rng& rng) {
  if (k < 2 || k > 5) fail(ErrorKind::InvalidArgument, "nws: k must be in [2,5]");
  if (p < 0.0 || p > 1.0) fail(ErrorKind::InvalidArgument, "nws: p must be in [0,1]");
  if (n < 3) fail(ErrorKind::InvalidArgument, "nws: need at least 3 nodes");
  // ring of n nodes, each connected to its k nearest neighbours
  // (k-1 when k is odd)
  int half = k / 2;
  WeightedGraph g;
  g.n = n;
  std::set<std::pair<int, int>> seen;
  for (int u = 0; u < n; ++u) {
    for (int off = 1; off <= half; ++off) {
      add_edge_unique(seen, g.edges, u, (u + off) % n);
    }
  }
  // for each ring edge (u,v), add a shortcut (u,w) with probability p
  std::vector<WeightedGraph::Edge> ring = g.edges;
  for (const auto& e : ring) {
    if (!rng.bernoulli(p)) continue;
    int w = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    add_edge_unique(seen, g.edges, e.u, w);
  }
  return g;
}

WeightedGraph gen_regular(int n, int d, Rng& rng) {
  if (d < 2 || d >= n) {
    fail(ErrorKind::InvalidArgument, "d-regular: need 2 <= d < n");
  }
  if ((static_cast<long long>(n) * d) % 2 != 0) {
    fail(ErrorKind::InvalidArgument, "d-regular: n*d must be even");
  }
  // pairing model with retries until the matching is simple
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<size_t>(n) * static_cast<size_t>(d));
    for (int u = 0; u < n; ++u) {
      for (int j = 0; j < d; ++j) stubs.push_back(u);
    }
    rng.shuffle(stubs);
    std::set<std::pair<int, int>> seen;
    std::vector<WeightedGraph::Edge> edges;
    bool ok = true;
    for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v) {
        ok = false;
        break;
      }
      auto key = std::minmax(u, v);
      if (!seen.insert({key.first, key.second}).second) {
        ok = false;
        break;
      }
      edges.push_back({key.first, key.second, 1});
    }
    if (ok) {
      WeightedGraph g;
      g.n = n;
      g.edges = std::move(edges);
      return g;
    }
  }
  fail(ErrorKind::Internal, "d-regular: pairing model failed to converge");
}

WeightedGraph gen_barabasi_albert(int n, int m, Rng& rng) {
  if (m < 2 || m > 5) fail(ErrorKind::InvalidArgument, "ba: m must be in [2,5]");
  if (n <= m) fail(ErrorKind::InvalidArgument, "ba: need n > m");
  WeightedGraph g;
  g.n = n;
  std::set<std::pair<int, int>> seen;
  // start from a star over the first m+1 nodes, then attach preferentially
  std::vector<int> repeated;
  for (int v = 1; v <= m; ++v) {
    add_edge_unique(seen, g.edges, 0, v);
    repeated.push_back(0);
    repeated.push_back(v);
  }
  for (int u = m + 1; u < n; ++u) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      int t = repeated[rng.below(repeated.size())];
      if (t != u) targets.insert(t);
    }
    for (int t : targets) {
      add_edge_unique(seen, g.edges, u, t);
      repeated.push_back(u);
      repeated.push_back(t);
    }
  }
  return g;
}

// Unweighted hop distances from source; -1 for unreachable.
std::vector<int> hop_distances(const WeightedGraph& g, int source) {
  auto adj = g.adjacency();
  std::vector<int> dist(static_cast<size_t>(g.n), -1);
  std::queue<int> q;
  dist[static_cast<size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (auto [v, w] : adj[static_cast<size_t>(u)]) {
      (void)w;
      if (dist[static_cast<size_t>(v)] < 0) {
        dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

WeightedGraph gen_graph_topology(GraphFamily family, int size,
                                 const GraphParams& params, Rng& rng) {
  if (size < 1) fail(ErrorKind::InvalidArgument, "graph size must be >= 1");
  switch (family) {
    case GraphFamily::ErdosRenyi: return gen_erdos_renyi(size, params.p, rng);
    case GraphFamily::NewmanWattsStrogatz:
      return gen_nws(size, params.k, params.p, rng);
    case GraphFamily::DRegular: return gen_regular(size, params.d, rng);
    case GraphFamily::BarabasiAlbert:
      return gen_barabasi_albert(size, params.m, rng);
  }
  fail(ErrorKind::Internal, "unreachable graph family");
}

void assign_weights(WeightedGraph& g, int source, uint32_t width, Rng& rng,
                    uint32_t close_spread) {
  const uint32_t maxv = (1u << width) - 1;
  // Any distance the traversal evaluates is bounded by (hops+1) * wmax, where
  // hops is the largest finite hop count from the source. Capping the weight
  // range keeps every evaluated sum inside the number system.
  std::vector<int> hops = hop_distances(g, source);
  int h = 0;
  for (int d : hops) h = std::max(h, d);
  uint32_t wmax = std::max(1u, maxv / static_cast<uint32_t>(h + 1));
  if (close_spread > 0) {
    uint32_t spread = std::min(close_spread, wmax > 1 ? wmax - 1 : 0);
    uint32_t base =
        1 + static_cast<uint32_t>(rng.below(std::max(1u, wmax - spread)));
    for (auto& e : g.edges) {
      e.w = base + static_cast<uint32_t>(rng.below(spread + 1));
    }
  } else {
    for (auto& e : g.edges) {
      e.w = 1 + static_cast<uint32_t>(rng.below(wmax));
    }
  }
}

WeightedGraph gen_graph(GraphFamily family, int size, const GraphParams& params,
                        uint64_t seed, int source, uint32_t width,
                        bool hard_weights) {
  Rng rng(seed);
  WeightedGraph g = gen_graph_topology(family, size, params, rng);
  assign_weights(g, source, width, rng, hard_weights ? 4 : 0);
  g.validate();
  return g;
}

}  // namespace nee
