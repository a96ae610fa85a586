#include "compose.hpp"

#include <algorithm>

namespace nee {

namespace {

// Shared min semantics: the smallest considered token with e as infinity,
// ties to the lowest index; when every considered token is e the result is e
// pointed at the first considered position.
std::pair<TokenId, size_t> considered_min(const std::vector<TokenId>& tokens,
                                          const Mask& mask) {
  if (tokens.size() != mask.size()) {
    fail(ErrorKind::InvalidArgument, "subroutine mask length mismatch");
  }
  int best = -1;
  size_t first_considered = tokens.size();
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (mask[i]) continue;
    if (first_considered == tokens.size()) first_considered = i;
    if (is_end(tokens[i])) continue;
    if (best < 0 || tokens[i] < tokens[static_cast<size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  if (first_considered == tokens.size()) {
    fail(ErrorKind::InvalidArgument, "subroutine input is fully masked");
  }
  if (best < 0) return {kEndToken, first_considered};
  return {tokens[static_cast<size_t>(best)], static_cast<size_t>(best)};
}

}  // namespace

Subroutine oracle_min() {
  return [](const std::vector<TokenId>& tokens, const Mask& mask) {
    auto [value, ptr] = considered_min(tokens, mask);
    SubStep s;
    s.value = value;
    s.pointer = ptr;
    s.next_mask = mask;
    if (!is_end(value)) s.next_mask[ptr] = 1;
    return s;
  };
}

Subroutine oracle_merge() {
  return [](const std::vector<TokenId>& tokens, const Mask& mask) {
    auto [value, ptr] = considered_min(tokens, mask);
    SubStep s;
    s.value = value;
    s.pointer = ptr;
    s.next_mask = mask;
    if (!is_end(value)) {
      s.next_mask[ptr] = 1;
      if (ptr + 1 < s.next_mask.size()) s.next_mask[ptr + 1] = 0;
    }
    return s;
  };
}

namespace {

Subroutine oracle_arith(bool multiply) {
  return [multiply](const std::vector<TokenId>& tokens, const Mask& mask) {
    if (tokens.size() != 2 || mask.size() != 2) {
      fail(ErrorKind::InvalidArgument, "arithmetic subroutine expects two tokens");
    }
    SubStep s;
    s.pointer = 0;
    s.next_mask = mask;
    if (is_end(tokens[0]) || is_end(tokens[1])) {
      s.value = kEndToken;  // infinity absorbs
    } else {
      const uint64_t r =
          multiply ? static_cast<uint64_t>(tokens[0]) *
                         static_cast<uint64_t>(tokens[1])
                   : static_cast<uint64_t>(tokens[0]) +
                         static_cast<uint64_t>(tokens[1]);
      s.value = static_cast<TokenId>(r);
    }
    return s;
  };
}

}  // namespace

Subroutine oracle_add() { return oracle_arith(false); }
Subroutine oracle_multiply() { return oracle_arith(true); }

Subroutine nee_subroutine(const Model& model) {
  return [&model](const std::vector<TokenId>& tokens, const Mask& mask) {
    NeeStepResult r = model.nee_step(tokens, mask);
    SubStep s;
    s.value = r.value;
    s.pointer = r.pointer;
    s.next_mask = r.next_mask;
    return s;
  };
}

std::vector<TokenId> compose_dijkstra(const Subroutine& min_sub,
                                      const Subroutine& add_sub,
                                      const WeightedGraph& g, int source) {
  g.validate();
  if (source < 0 || source >= g.n) {
    fail(ErrorKind::InvalidArgument, "compose_dijkstra: source out of range");
  }
  auto adj = g.adjacency();
  const size_t n = static_cast<size_t>(g.n);
  std::vector<TokenId> dist(n, kEndToken);
  dist[static_cast<size_t>(source)] = 0;
  Mask mask(n + 1, 0);

  for (size_t iter = 0; iter <= n; ++iter) {
    std::vector<TokenId> tokens(dist);
    tokens.push_back(kEndToken);
    SubStep sel = min_sub(tokens, mask);
    if (is_end(sel.value)) break;  // whatever remains is unreachable
    if (sel.pointer >= n || mask[sel.pointer]) {
      fail(ErrorKind::Budget,
           "min subroutine pointed at an invalid queue position");
    }
    const size_t u = sel.pointer;
    if (sel.next_mask.size() != mask.size() ||
        count_considered(sel.next_mask) >= count_considered(mask)) {
      fail(ErrorKind::Budget, "mask update failed to shrink the queue");
    }
    mask = sel.next_mask;
    for (auto [v, w] : adj[u]) {
      if (mask[static_cast<size_t>(v)]) continue;
      SubStep sum = add_sub({dist[u], static_cast<TokenId>(w)}, Mask{0, 0});
      SubStep upd = min_sub({dist[static_cast<size_t>(v)], sum.value, kEndToken},
                            Mask{0, 0, 0});
      dist[static_cast<size_t>(v)] = upd.value;
    }
  }
  return dist;
}

MstResult compose_prim(const Subroutine& min_sub, const WeightedGraph& g,
                       int root) {
  g.validate();
  if (root < 0 || root >= g.n) {
    fail(ErrorKind::InvalidArgument, "compose_prim: root out of range");
  }
  if (!g.connected()) {
    fail(ErrorKind::InvalidArgument, "compose_prim requires a connected graph");
  }
  auto adj = g.adjacency();
  const size_t n = static_cast<size_t>(g.n);
  std::vector<TokenId> key(n, kEndToken);
  key[static_cast<size_t>(root)] = 0;
  std::vector<int> parent(n, -1);
  Mask mask(n + 1, 0);

  size_t popped = 0;
  for (size_t iter = 0; iter <= n; ++iter) {
    std::vector<TokenId> tokens(key);
    tokens.push_back(kEndToken);
    SubStep sel = min_sub(tokens, mask);
    if (is_end(sel.value)) break;
    if (sel.pointer >= n || mask[sel.pointer]) {
      fail(ErrorKind::Budget,
           "min subroutine pointed at an invalid frontier position");
    }
    const size_t u = sel.pointer;
    if (sel.next_mask.size() != mask.size() ||
        count_considered(sel.next_mask) >= count_considered(mask)) {
      fail(ErrorKind::Budget, "mask update failed to shrink the frontier");
    }
    mask = sel.next_mask;
    ++popped;
    for (auto [v, w] : adj[u]) {
      if (mask[static_cast<size_t>(v)]) continue;
      SubStep upd = min_sub({key[static_cast<size_t>(v)],
                             static_cast<TokenId>(w), kEndToken},
                            Mask{0, 0, 0});
      key[static_cast<size_t>(v)] = upd.value;
      if (upd.pointer == 1) parent[static_cast<size_t>(v)] = static_cast<int>(u);
    }
  }
  if (popped != n) {
    fail(ErrorKind::Budget, "prim composition stopped before spanning the graph");
  }

  MstResult res;
  std::map<std::pair<int, int>, uint32_t> weight_of;
  for (const auto& e : g.edges) {
    auto k = std::minmax(e.u, e.v);
    weight_of[{k.first, k.second}] = e.w;
  }
  std::vector<int> comp(n);
  for (size_t i = 0; i < n; ++i) comp[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (comp[static_cast<size_t>(x)] != x) x = comp[static_cast<size_t>(x)];
    return x;
  };
  bool acyclic = true;
  for (int v = 0; v < g.n; ++v) {
    if (v == root) continue;
    const int p = parent[static_cast<size_t>(v)];
    if (p < 0) {
      acyclic = false;
      break;
    }
    auto k = std::minmax(v, p);
    auto it = weight_of.find({k.first, k.second});
    if (it == weight_of.end()) {
      acyclic = false;
      break;
    }
    res.edges.push_back({p, v});
    res.weight += it->second;
    const int a = find(v), b = find(p);
    if (a == b) {
      acyclic = false;
      break;
    }
    comp[static_cast<size_t>(a)] = b;
  }
  res.valid_tree =
      acyclic && res.edges.size() == n - 1;
  return res;
}

std::vector<uint32_t> compose_merge_sort(const Subroutine& merge_sub,
                                         const std::vector<uint32_t>& seq) {
  if (seq.size() <= 1) return seq;
  const size_t mid = seq.size() / 2;
  std::vector<uint32_t> left(seq.begin(), seq.begin() + mid);
  std::vector<uint32_t> right(seq.begin() + mid, seq.end());
  left = compose_merge_sort(merge_sub, left);
  right = compose_merge_sort(merge_sub, right);

  std::vector<TokenId> tokens;
  tokens.reserve(left.size() + right.size() + 2);
  for (uint32_t v : left) tokens.push_back(static_cast<TokenId>(v));
  tokens.push_back(kEndToken);
  for (uint32_t v : right) tokens.push_back(static_cast<TokenId>(v));
  tokens.push_back(kEndToken);
  Mask mask(tokens.size(), 1);
  mask[0] = 0;
  mask[left.size() + 1] = 0;

  std::vector<uint32_t> merged;
  const size_t budget = 2 * tokens.size();
  bool terminated = false;
  for (size_t step = 0; step < budget; ++step) {
    SubStep r = merge_sub(tokens, mask);
    if (is_end(r.value)) {
      terminated = true;
      break;
    }
    merged.push_back(static_cast<uint32_t>(r.value));
    if (r.next_mask.size() != mask.size() ||
        count_considered(r.next_mask) == 0) {
      break;
    }
    mask = r.next_mask;
  }
  if (!terminated) {
    fail(ErrorKind::Budget, "merge subroutine exhausted its step budget");
  }
  return merged;
}

}  // namespace nee
