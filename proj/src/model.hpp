#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "optim.hpp"
#include "trace.hpp"

namespace nee {

// Value/pointer outputs of one decode pass. The pointer is the final decoder
// block's attention distribution over encoder positions: a valid distribution
// over considered positions, exactly 0 on ignored ones.
struct DecoderOutput {
  Tensor value_logits;   // (out_width + 1): bit logits then the end logit
  Tensor pointer_logits; // (L) raw scores before the masked softmax
  Tensor pointer;        // (L) masked softmax of the above
};

struct MaskUpdateOut {
  Tensor logits;  // (L) pre-sigmoid
  Tensor probs;   // (L)
};

struct NeeStepResult {
  TokenId value = 0;
  size_t pointer = 0;
  Mask next_mask;
  std::vector<double> pointer_dist;
  std::vector<double> value_probs;
  std::vector<double> mask_probs;
};

struct NeeRunResult {
  std::vector<TokenId> outputs;
  bool terminated = false;  // emitted e within the step budget
  size_t steps = 0;
  std::vector<std::vector<double>> pointer_rows;
};

struct Seq2SeqResult {
  std::vector<TokenId> outputs;
  bool terminated = false;
  std::vector<std::vector<double>> attention_rows;  // last-block cross attention
};

// Per-head loss breakdown for one supervised step.
struct StepLoss {
  Tensor total;
  double value = 0.0;
  double pointer = 0.0;
  double mask = 0.0;
};

class Model {
 public:
  Model(ModelConfig cfg, uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  // Content hash over parameter values; cheap purity check for evaluation.
  uint64_t params_hash() const;

  // ---- differentiable graph builders ----------------------------------
  Tensor embed_tokens(Tape& tape, const std::vector<TokenId>& tokens) const;
  // Attention scores between projected queries and keys, (Lq, Lk). `prefix`
  // addresses the per-layer scoring parameters (unused for dot-product).
  Tensor attention_scores(Tape& tape, const Tensor& q, const Tensor& k,
                          const std::string& prefix) const;
  Tensor encoder_forward(Tape& tape, const Tensor& embedded,
                         const Mask& ignore) const;
  DecoderOutput decoder_forward(Tape& tape, const Tensor& enc_states,
                                const Mask& ignore) const;
  MaskUpdateOut mask_update(Tape& tape, const Mask& current,
                            const std::vector<double>& pointer_onehot) const;
  // Full supervised loss for one trace step (value + pointer + mask heads,
  // unit weights; heads without targets contribute nothing).
  StepLoss nee_example_loss(Tape& tape, const TraceStep& step) const;
  // Teacher-forced loss for the seq2seq baseline on one sequence.
  StepLoss seq2seq_example_loss(Tape& tape,
                                const std::vector<TokenId>& tokens) const;

  // ---- inference --------------------------------------------------------
  NeeStepResult nee_step(const std::vector<TokenId>& tokens,
                         const Mask& ignore) const;
  // Recurrent application until the value head emits e or the step budget
  // (2 * length) runs out; the latter is reported as non-termination.
  NeeRunResult nee_run(const std::vector<TokenId>& tokens) const;
  Seq2SeqResult seq2seq_decode(const std::vector<TokenId>& tokens) const;

  // Sorted-output target used by the baseline's supervision.
  static std::vector<TokenId> sorted_targets(const std::vector<TokenId>& tokens);

 private:
  struct AttnOut {
    Tensor out;      // (Lq, w) after the output projection
    Tensor weights;  // (Lq, Lk) attention distribution
    Tensor scores;   // (Lq, Lk) raw logits before softmax/masking
  };

  Tensor linear(Tape& tape, const std::string& prefix, const Tensor& x) const;
  Tensor ffn(Tape& tape, const std::string& prefix, const Tensor& x) const;
  Tensor layer_norm(Tape& tape, const std::string& prefix, const Tensor& x) const;
  AttnOut attend(Tape& tape, const std::string& prefix, const Tensor& q_in,
                 const Tensor& kv_in, const Mask* key_ignore, bool causal) const;
  Tensor encoder_block(Tape& tape, size_t layer, const Tensor& x,
                       const Mask& ignore) const;
  // Returns the block output; fills `cross` with the cross-attention result.
  Tensor decoder_block(Tape& tape, size_t layer, const Tensor& x,
                       const Tensor& enc, const Mask& enc_ignore, bool causal,
                       AttnOut* cross) const;
  Tensor decode_stack(Tape& tape, const Tensor& dec_in, const Tensor& enc,
                      const Mask& enc_ignore, bool causal, AttnOut* last_cross) const;
  Tensor value_head(Tape& tape, const Tensor& state) const;
  Tensor vocab_head(Tape& tape, const Tensor& states) const;
  std::vector<double> value_targets(TokenId target, std::vector<double>* weights) const;
  TokenId value_from_probs(const std::vector<double>& probs) const;

  void init_params();
  void add_param(const std::string& name, Shape shape,
                 const std::function<double(Rng&)>& draw);
  void add_linear(const std::string& prefix, size_t in, size_t out);
  void add_norm(const std::string& prefix, size_t dim);
  void add_attention(const std::string& prefix);

  ModelConfig cfg_;
  uint64_t init_seed_ = 0;
  Params params_;
};

// ---------------------------------------------------------------------------
// checkpoints

struct Checkpoint {
  nlohmann::json meta;  // model config, optional train config/dataset spec,
                        // step counter, seed
  Params params;
};

// Binary format (little-endian, see docs/formats.md): magic "NEE1", version,
// canonical JSON meta block with embedded model-config hash, a manifest of
// (name, shape, offset), then the raw float64 payload and its checksum.
// save -> load is a bitwise identity.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
// Loads and rejects the file when its model config differs from `expect`.
Checkpoint load_checkpoint_expect(const std::string& path,
                                  const ModelConfig& expect);
Model model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace nee
