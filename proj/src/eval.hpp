#pragma once

#include "compose.hpp"
#include "dataset.hpp"

namespace nee {

struct LengthResult {
  size_t length = 0;
  double exact = 0.0;
  double element = 0.0;
  size_t n = 0;
};

struct EvalReport {
  std::string kind;  // "generalization" | "pairs"
  std::string task;
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  size_t n_per_length = 0;
  std::vector<LengthResult> lengths;
  double accuracy = 0.0;  // pairs kind
  size_t n_pairs = 0;
  double runtime_sec = 0.0;
  nlohmann::json extra;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// Exact content-and-position match rates for trained models across input
// sizes far beyond training. Tasks: selection-sort, seq2seq-baseline,
// merge-sort (composed), dijkstra, prim (composed; an auxiliary model is
// required for dijkstra's additions). Test sequences follow the 60/40
// random/close mix; test graphs draw the family parameter per instance.
EvalReport evaluate_generalization(const Model& model, const std::string& task,
                                   const std::vector<size_t>& lengths,
                                   size_t n_per_length, uint64_t seed,
                                   const Model* aux_model = nullptr);

// Pair accuracy of an arithmetic model on supervised (a, b) -> value steps.
EvalReport evaluate_pairs(const Model& model, const std::vector<TraceStep>& pairs);

// Identity checks from the token semantics: 0 + x = x and e + x = e.
struct IdentityReport {
  double zero_identity = 0.0;  // fraction of tested x with 0 + x = x
  double inf_identity = 0.0;   // fraction of tested x with e + x = e
  size_t n = 0;
};
IdentityReport evaluate_addition_identities(const Model& model, size_t n,
                                            uint64_t seed);

// Mean of the maximum attention weight per decode step, averaged over inputs,
// indexed by step. NEE models report the pointer head, the baseline reports
// its last-block cross attention.
std::vector<double> attention_sharpness(
    const Model& model, const std::vector<std::vector<TokenId>>& inputs);

// Exact-match comparison helpers shared with the metric sanity tests.
bool exact_match(const std::vector<TokenId>& out, const std::vector<TokenId>& ref);
double elementwise_accuracy(const std::vector<TokenId>& out,
                            const std::vector<TokenId>& ref);

}  // namespace nee
