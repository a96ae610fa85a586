#pragma once

#include <functional>

#include "model.hpp"

namespace nee {

// One subroutine invocation as the composition hosts see it. Exactly the
// nee_step contract, so a trained NEE and an exact oracle are
// interchangeable.
struct SubStep {
  TokenId value = 0;
  size_t pointer = 0;
  Mask next_mask;
};

using Subroutine =
    std::function<SubStep(const std::vector<TokenId>&, const Mask&)>;

// Exact reference subroutines (oracle substitution).
Subroutine oracle_min();    // min over considered tokens, e acts as infinity;
                            // mask update sets the chosen position to ignored
Subroutine oracle_merge();  // min over the exposed fronts; mask update
                            // advances the chosen sequence's front
Subroutine oracle_add();    // [a, b] -> a + b, e absorbing
Subroutine oracle_multiply();

// Wraps a trained model's nee_step.
Subroutine nee_subroutine(const Model& model);

// Dijkstra host: steps (1)-(4) with min-selection, addition and elementwise
// min delegated to the subroutines. Returns per-node distance tokens
// (e = unreachable).
std::vector<TokenId> compose_dijkstra(const Subroutine& min_sub,
                                      const Subroutine& add_sub,
                                      const WeightedGraph& g, int source);

struct MstResult {
  std::vector<std::pair<int, int>> edges;
  uint64_t weight = 0;
  bool valid_tree = false;
};

// Prim host over a connected graph; output validated as a spanning tree.
MstResult compose_prim(const Subroutine& min_sub, const WeightedGraph& g,
                       int root);

// Recursive split schedule in the host, every merge delegated.
std::vector<uint32_t> compose_merge_sort(const Subroutine& merge_sub,
                                         const std::vector<uint32_t>& seq);

}  // namespace nee
