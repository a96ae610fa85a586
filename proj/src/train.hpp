#pragma once

#include "dataset.hpp"
#include "model.hpp"

namespace nee {

// Step roles a training task consumes.
std::vector<StepRole> roles_for_task(const std::string& task);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<double> loss_curve;                      // per optimizer step
  std::vector<std::pair<size_t, double>> val_curve;    // (step, exact match)
  size_t steps_run = 0;
  bool early_stopped = false;
  double best_val = 0.0;
};

// Deterministic single-threaded training loop with periodic validation,
// best-checkpoint tracking and optional early stopping on a validation
// exact-match plateau. Divergence (any non-finite value) aborts with a
// diagnostic carrying the step number.
TrainResult train(const TrainConfig& cfg, const Dataset& data);

// Step-level exact match of a NEE on supervised steps: value correct, the
// pointed-at token matches the target's token, and the binarized next mask
// matches where supervised. For seq2seq records: greedy decode exact match.
double validation_exact_match(const Model& model, const std::vector<TraceStep>& steps,
                              size_t limit);

}  // namespace nee
