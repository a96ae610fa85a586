#pragma once

#include <string>

#include <json.hpp>

#include "common.hpp"

namespace nee {

enum class AttentionKind { DotProduct, Mlp, MlpSymmetric };
enum class InputEncoding { Binary, OneHot, BinaryRaw };
enum class OutputEncoding { Binary, OneHot };
enum class ModelMode { Nee, Seq2Seq };

AttentionKind attention_from_string(const std::string& s);
std::string attention_name(AttentionKind k);
InputEncoding input_encoding_from_string(const std::string& s);
std::string input_encoding_name(InputEncoding e);
OutputEncoding output_encoding_from_string(const std::string& s);
std::string output_encoding_name(OutputEncoding e);

// Architecture description. Defaults follow the published hyperparameter
// table; desk-scale runs shrink extents but never change the wiring.
struct ModelConfig {
  ModelMode mode = ModelMode::Nee;
  uint32_t bit_width = 8;   // input number width
  uint32_t out_width = 8;   // value-head bits
  size_t d = 16;            // embedding dimension
  size_t enc_layers = 6;
  size_t dec_layers = 6;
  size_t ffn_hidden = 128;  // 2-layer feed-forward block
  size_t attn_hidden = 32;  // MLP attention hidden width
  double residual_scale = 1.5;
  AttentionKind attention = AttentionKind::MlpSymmetric;
  bool shared_projection = true;
  InputEncoding input_encoding = InputEncoding::Binary;
  OutputEncoding output_encoding = OutputEncoding::Binary;
  double dropout = 0.1;
  size_t mask_filters = 16;
  size_t mask_filter_size = 3;
  size_t mask_ffn_hidden = 16;
  double norm_eps = 1e-9;
  double bit_threshold = 0.5;
  double mask_threshold = 0.5;

  // Effective model width: BinaryRaw feeds bits straight through, so the
  // stream width is bit_width + 1 (end flag) instead of d.
  size_t width() const {
    return input_encoding == InputEncoding::BinaryRaw
               ? static_cast<size_t>(bit_width) + 1
               : d;
  }

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  // FNV-1a over the canonical JSON encoding.
  uint64_t hash() const;
  void validate() const;
};

// Named architecture variants from the ablation study. Base names: "nee",
// "all_mod", "vanilla". Modifiers: "-C1".."-C5" remove a modification,
// "+C5"/"+C6" add one, ":binout" switches the output head to binary.
//   C1 residual 1.5 / C2 MLP attention / C3 symmetrized MLP attention /
//   C4 shared q/k/v projection / C5 binary input encoding /
//   C6 raw binary input without a learned embedding
ModelConfig apply_variant(const std::string& variant, uint32_t bit_width,
                          size_t d);

struct TrainConfig {
  std::string task;  // selection-sort | merge | add | multiply | dijkstra |
                     // prim | seq2seq-baseline
  ModelConfig model;
  uint64_t seed = 7;
  size_t steps = 20000;
  size_t batch = 32;
  size_t warmup_steps = 4000;
  size_t eval_every = 500;       // validation cadence
  size_t val_examples = 512;     // validation subsample
  size_t patience = 0;           // 0 disables early stopping
  double min_loss_improvement = 1e-4;
  std::string scale = "desk";    // desk | paper

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Desk/paper presets per task (architecture class identical, extents differ).
TrainConfig default_train_config(const std::string& task, const std::string& scale);

// Flat "key = value" config file (strings quoted, ints, floats, bools,
// # comments). Returns a flat JSON object.
nlohmann::json parse_kv_file(const std::string& path);
nlohmann::json parse_kv_text(const std::string& text);

}  // namespace nee
