// Test-only reference oracles and trace replay interpreters. These stay
// independent of the trace generators: sorting uses std::sort, merging a
// two-pointer reference, shortest paths Bellman-Ford, spanning trees Kruskal
// plus exhaustive edge-subset search where tractable.
#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "graph.hpp"
#include "trace.hpp"

namespace nee::testing {

inline std::vector<uint32_t> sorted_reference(std::vector<uint32_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<uint32_t> merge_reference(const std::vector<uint32_t>& a,
                                             const std::vector<uint32_t>& b) {
  std::vector<uint32_t> out;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      out.push_back(a[i++]);
    } else {
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return out;
}

// -1 marks unreachable nodes.
inline std::vector<long> bellman_ford(const WeightedGraph& g, int source) {
  const long inf = -1;
  std::vector<long> dist(static_cast<size_t>(g.n), inf);
  dist[static_cast<size_t>(source)] = 0;
  for (int round = 0; round < g.n; ++round) {
    bool changed = false;
    for (const auto& e : g.edges) {
      for (auto [u, v] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
        if (dist[static_cast<size_t>(u)] < 0) continue;
        const long cand = dist[static_cast<size_t>(u)] + e.w;
        if (dist[static_cast<size_t>(v)] < 0 ||
            cand < dist[static_cast<size_t>(v)]) {
          dist[static_cast<size_t>(v)] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return dist;
}

inline bool spans(const WeightedGraph& g, const std::vector<size_t>& edge_idx) {
  std::vector<int> comp(static_cast<size_t>(g.n));
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](int x) {
    while (comp[static_cast<size_t>(x)] != x) x = comp[static_cast<size_t>(x)];
    return x;
  };
  size_t joins = 0;
  for (size_t i : edge_idx) {
    int a = find(g.edges[i].u), b = find(g.edges[i].v);
    if (a == b) return false;
    comp[static_cast<size_t>(a)] = b;
    ++joins;
  }
  return joins == static_cast<size_t>(g.n) - 1;
}

// Kruskal; requires a connected graph.
inline uint64_t mst_weight_kruskal(const WeightedGraph& g) {
  std::vector<size_t> idx(g.edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return g.edges[a].w < g.edges[b].w;
  });
  std::vector<int> comp(static_cast<size_t>(g.n));
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](int x) {
    while (comp[static_cast<size_t>(x)] != x) x = comp[static_cast<size_t>(x)];
    return x;
  };
  uint64_t total = 0;
  size_t used = 0;
  for (size_t i : idx) {
    int a = find(g.edges[i].u), b = find(g.edges[i].v);
    if (a == b) continue;
    comp[static_cast<size_t>(a)] = b;
    total += g.edges[i].w;
    if (++used == static_cast<size_t>(g.n) - 1) break;
  }
  return total;
}

// Exhaustive minimum over every (n-1)-edge subset that spans the graph.
// Returns nullopt when the subset count exceeds the budget.
inline std::optional<uint64_t> mst_weight_exhaustive(const WeightedGraph& g,
                                                     size_t budget = 300000) {
  const size_t m = g.edges.size(), k = static_cast<size_t>(g.n) - 1;
  if (k == 0) return 0;
  if (m < k) return std::nullopt;
  double combos = 1.0;
  for (size_t i = 0; i < k; ++i) combos *= static_cast<double>(m - i) / (i + 1);
  if (combos > static_cast<double>(budget)) return std::nullopt;

  std::vector<size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  std::optional<uint64_t> best;
  while (true) {
    if (spans(g, pick)) {
      uint64_t w = 0;
      for (size_t i : pick) w += g.edges[i].w;
      if (!best || w < *best) best = w;
    }
    // next combination
    size_t i = k;
    while (i > 0) {
      --i;
      if (pick[i] != i + m - k) {
        ++pick[i];
        for (size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (i == 0) return best;
    }
  }
}

// ---------------------------------------------------------------------------
// replay interpreters: mechanically apply the recorded targets

inline std::vector<uint32_t> replay_value_trace(const std::vector<TraceStep>& trace) {
  std::vector<uint32_t> out;
  for (const TraceStep& st : trace) {
    if (is_end(st.target_value)) break;
    out.push_back(static_cast<uint32_t>(st.target_value));
  }
  return out;
}

// Applies a Dijkstra trace to the graph and returns the distances its
// recorded targets produce (-1 = unreachable). The interpreter tracks the
// settled set itself, so step alignment follows the generator contract
// (relaxations visit unsettled neighbors in adjacency order).
inline std::vector<long> replay_dijkstra(const WeightedGraph& g,
                                         const std::vector<TraceGroup>& groups) {
  auto adj = g.adjacency();
  std::vector<long> dist(static_cast<size_t>(g.n), -1);
  std::vector<bool> settled(static_cast<size_t>(g.n), false);
  size_t gi = 0;
  while (gi < groups.size()) {
    const TraceGroup& sel = groups[gi++];
    if (sel.kind != StepRole::MinSelect || sel.steps.size() != 1) {
      throw std::runtime_error("dijkstra trace: malformed selection group");
    }
    const TraceStep& st = sel.steps[0];
    if (is_end(st.target_value)) break;
    const auto u = static_cast<size_t>(st.target_pointer);
    dist[u] = st.target_value;
    settled[u] = true;
    const TraceGroup* mins = nullptr;
    if (gi < groups.size() && groups[gi].kind == StepRole::Add) ++gi;
    if (gi < groups.size() && groups[gi].kind == StepRole::ElemMin) {
      mins = &groups[gi++];
    }
    size_t si = 0;
    for (auto [v, w] : adj[u]) {
      (void)w;
      if (settled[static_cast<size_t>(v)]) continue;
      if (!mins || si >= mins->steps.size()) {
        throw std::runtime_error("dijkstra trace: missing relaxation step");
      }
      const TraceStep& em = mins->steps[si++];
      if (!is_end(em.target_value)) {
        dist[static_cast<size_t>(v)] = em.target_value;
      }
    }
    if (mins && si != mins->steps.size()) {
      throw std::runtime_error("dijkstra trace: extra relaxation steps");
    }
  }
  return dist;
}

// Applies a Prim trace; returns the replayed MST weight and whether the
// parents form a spanning tree.
inline std::pair<uint64_t, bool> replay_prim(const WeightedGraph& g, int root,
                                             const std::vector<TraceGroup>& groups) {
  auto adj = g.adjacency();
  std::vector<int> parent(static_cast<size_t>(g.n), -1);
  std::vector<bool> settled(static_cast<size_t>(g.n), false);
  size_t gi = 0;
  while (gi < groups.size()) {
    const TraceGroup& sel = groups[gi++];
    if (sel.kind != StepRole::MinSelect || sel.steps.size() != 1) {
      throw std::runtime_error("prim trace: malformed selection group");
    }
    const TraceStep& st = sel.steps[0];
    if (is_end(st.target_value)) break;
    const auto u = static_cast<size_t>(st.target_pointer);
    settled[u] = true;
    const TraceGroup* mins = nullptr;
    if (gi < groups.size() && groups[gi].kind == StepRole::ElemMin) {
      mins = &groups[gi++];
    }
    size_t si = 0;
    for (auto [v, w] : adj[u]) {
      (void)w;
      if (settled[static_cast<size_t>(v)]) continue;
      if (!mins || si >= mins->steps.size()) {
        throw std::runtime_error("prim trace: missing key-update step");
      }
      const TraceStep& em = mins->steps[si++];
      if (em.target_pointer == 1) parent[static_cast<size_t>(v)] = static_cast<int>(u);
    }
  }
  std::map<std::pair<int, int>, uint32_t> weight_of;
  for (const auto& e : g.edges) {
    auto k = std::minmax(e.u, e.v);
    weight_of[{k.first, k.second}] = e.w;
  }
  uint64_t total = 0;
  std::vector<int> comp(static_cast<size_t>(g.n));
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](int x) {
    while (comp[static_cast<size_t>(x)] != x) x = comp[static_cast<size_t>(x)];
    return x;
  };
  size_t edges = 0;
  for (int v = 0; v < g.n; ++v) {
    if (v == root) continue;
    const int p = parent[static_cast<size_t>(v)];
    if (p < 0) return {0, false};
    auto key = std::minmax(v, p);
    auto it = weight_of.find({key.first, key.second});
    if (it == weight_of.end()) return {0, false};
    int a = find(v), b = find(p);
    if (a == b) return {0, false};
    comp[static_cast<size_t>(a)] = b;
    total += it->second;
    ++edges;
  }
  return {total, edges == static_cast<size_t>(g.n) - 1};
}

}  // namespace nee::testing
