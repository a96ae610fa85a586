#include "ablate.hpp"

#include <algorithm>

#include "eval.hpp"

namespace nee {

namespace {

double decode_accuracy(const Model& model, const std::string& mix, size_t len,
                       size_t n_eval, uint64_t seed) {
  DistributionSpec spec;
  spec.width = model.config().bit_width;
  spec.close_spread = 8;
  if (mix == "mixed") {
    spec.mode = DistMode::Mixed;
    spec.close_ratio = 0.4;
  } else if (mix == "random") {
    spec.mode = DistMode::Random;
  } else if (mix == "hard") {
    spec.mode = DistMode::Close;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown test mix '" + mix + "'");
  }
  Rng rng(derive_seed(seed, "ablate-eval-" + mix + "-" + std::to_string(len)));
  size_t hits = 0;
  for (size_t i = 0; i < n_eval; ++i) {
    std::vector<uint32_t> seq = sample_sequence(spec, len, rng);
    std::vector<TokenId> tokens;
    for (uint32_t v : seq) tokens.push_back(static_cast<TokenId>(v));
    tokens.push_back(kEndToken);
    Seq2SeqResult r = model.seq2seq_decode(tokens);
    std::vector<TokenId> want = Model::sorted_targets(tokens);
    want.pop_back();
    if (r.terminated && r.outputs == want) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_eval);
}

}  // namespace

nlohmann::json run_ablation(const std::vector<std::string>& variants,
                            const nlohmann::json& options) {
  if (variants.empty()) {
    fail(ErrorKind::InvalidArgument, "run_ablation needs at least one variant");
  }
  const uint64_t seed = options.value("seed", 7ull);
  const size_t steps = options.value("steps", size_t{6000});
  const size_t batch = options.value("batch", size_t{32});
  const size_t d = options.value("d", size_t{16});
  const uint32_t bit_width = options.value("bit_width", 8u);
  const size_t n_train = options.value("n_train", size_t{20000});
  const size_t n_val = options.value("n_val", size_t{2000});
  const size_t max_len = options.value("max_len", size_t{8});
  const size_t n_eval = options.value("n_eval", size_t{200});
  const size_t patience = options.value("patience", size_t{0});
  std::vector<size_t> eval_lengths =
      options.value("eval_lengths", std::vector<size_t>{8});
  std::vector<std::string> mixes =
      options.value("mixes", std::vector<std::string>{"mixed", "random", "hard"});

  nlohmann::json data_spec;
  data_spec["task"] = "seq2seq-baseline";
  data_spec["seed"] = seed;
  data_spec["n_train"] = n_train;
  data_spec["n_val"] = n_val;
  data_spec["max_len"] = max_len;
  data_spec["width"] = bit_width;
  Dataset data = generate_dataset(data_spec);

  nlohmann::json out;
  out["options"] = options;
  out["dataset_spec"] = data.spec;
  auto& rows = out["variants"] = nlohmann::json::array();
  for (const std::string& variant : variants) {
    TrainConfig cfg;
    cfg.task = "seq2seq-baseline";
    cfg.model = apply_variant(variant, bit_width, d);
    cfg.model.enc_layers = options.value("enc_layers", size_t{2});
    cfg.model.dec_layers = options.value("dec_layers", size_t{2});
    cfg.seed = seed;  // identical data and seed across variants
    cfg.steps = steps;
    cfg.batch = batch;
    cfg.warmup_steps = options.value("warmup_steps", size_t{1000});
    cfg.patience = patience;
    cfg.eval_every = options.value("eval_every", size_t{500});
    TrainResult tr = train(cfg, data);
    Model model = model_from_checkpoint(tr.checkpoint);

    nlohmann::json row;
    row["variant"] = variant;
    row["steps_run"] = tr.steps_run;
    row["best_val"] = tr.best_val;
    nlohmann::json acc;
    for (const std::string& mix : mixes) {
      nlohmann::json per_len;
      for (size_t len : eval_lengths) {
        per_len[std::to_string(len)] =
            decode_accuracy(model, mix, len, n_eval, seed);
      }
      acc[mix] = per_len;
    }
    row["accuracy"] = acc;
    rows.push_back(row);
  }
  return out;
}

}  // namespace nee
