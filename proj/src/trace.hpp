#pragma once

#include <cstdint>
#include <vector>

#include "bits.hpp"
#include "graph.hpp"
#include "tape.hpp"

namespace nee {

// What a supervised step is teaching. MinSelect and ElemMin are both
// min-finding and train the same model; the tags keep provenance so graph
// traces can be sliced per subroutine.
enum class StepRole : uint8_t {
  MinSelect = 0,
  ElemMin = 1,
  Merge = 2,
  Add = 3,
  Multiply = 4,
  Seq2Seq = 5,
};

const char* step_role_name(StepRole role);

// One supervised subroutine invocation. target_pointer = -1 and an empty
// target_next_mask mean the respective head is unsupervised for this step.
struct TraceStep {
  std::vector<TokenId> tokens;
  Mask mask;
  TokenId target_value = 0;
  int32_t target_pointer = -1;
  Mask target_next_mask;
  StepRole role = StepRole::MinSelect;

  bool has_pointer() const { return target_pointer >= 0; }
  bool has_next_mask() const { return !target_next_mask.empty(); }
};

struct TraceGroup {
  StepRole kind = StepRole::MinSelect;
  std::vector<TraceStep> steps;
};

// ---------------------------------------------------------------------------
// number distributions

enum class DistMode { Random, Close, Mixed };

struct DistributionSpec {
  DistMode mode = DistMode::Mixed;
  uint32_t width = 8;
  uint32_t close_spread = 8;  // max-min bound for close sequences
  double close_ratio = 0.05;  // probability a sequence is close (mixed mode)
};

DistMode dist_mode_from_string(const std::string& s);
std::string dist_mode_name(DistMode m);

std::vector<uint32_t> sample_sequence(const DistributionSpec& spec,
                                      size_t length, Rng& rng);
std::vector<uint32_t> sample_sequence(const DistributionSpec& spec,
                                      size_t length, uint64_t seed);

// ---------------------------------------------------------------------------
// sequence subroutine traces

// Selection sort over [seq..., e]: step k exposes the k-th smallest remaining
// element (ties resolved to the lowest index), points at it and masks it out;
// the final step targets e.
std::vector<TraceStep> gen_selection_sort_trace(const std::vector<uint32_t>& seq);

// Two-pointer merge over [seq1, e, seq2, e] with one exposed front per
// sequence; advances the chosen front each step. Inputs must be sorted
// ascending.
std::vector<TraceStep> gen_merge_trace(const std::vector<uint32_t>& seq1,
                                       const std::vector<uint32_t>& seq2);

// ---------------------------------------------------------------------------
// arithmetic pairs

struct ArithmeticDataset {
  std::vector<TraceStep> train;
  std::vector<TraceStep> eval;           // pairs not seen in training
  std::vector<uint32_t> holdout;         // numbers excluded from training
  std::vector<uint32_t> train_numbers;   // complement of holdout
};

// Samples `count` distinct numbers to hold out of training. 0 is always kept
// trainable (it is the start token).
std::vector<uint32_t> sample_holdout(uint32_t width, size_t count, uint64_t seed);

// op add: 8-bit operands, pairs with a+b >= 2^width excluded, e-pairs with
// target e included. op multiply: 12-bit operands, 24-bit products.
ArithmeticDataset gen_arithmetic_pairs(bool multiply, uint32_t width,
                                       const std::vector<uint32_t>& holdout,
                                       uint64_t seed, size_t max_train_pairs,
                                       size_t eval_pairs);

// ---------------------------------------------------------------------------
// graph algorithm traces

// Dijkstra from `source`, expressed as NEE invocations: per iteration one
// min-selection over the distance array (with its mask update), then per
// relaxed neighbor an addition step and an elementwise-min step. Unvisited
// distances are e.
std::vector<TraceGroup> gen_dijkstra_trace(const WeightedGraph& g, int source);

// Prim from `root`: per iteration a min-selection over the key array (with
// mask update) and per neighbor an elementwise-min key update. Requires a
// connected graph.
std::vector<TraceGroup> gen_prim_trace(const WeightedGraph& g, int root);

// Total weight of edges (v, parent[v]) reconstructed by replaying a Prim
// trace; helper shared by tests and evaluation.
struct PrimResult {
  std::vector<std::pair<int, int>> edges;
  uint64_t total_weight = 0;
};

}  // namespace nee
