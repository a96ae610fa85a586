#pragma once

#include "train.hpp"

namespace nee {

// Trains every variant on an identical dataset and seed, then measures exact
// match on mixed / random / hard test sets. options: seed, steps, batch,
// d, bit_width, n_train, n_val, max_len, eval_lengths, n_eval, patience.
// Returns {"variants": [{"variant": name, "accuracy": {mix: {length: acc}}}],
//          "options": ...}.
nlohmann::json run_ablation(const std::vector<std::string>& variants,
                            const nlohmann::json& options);

}  // namespace nee
