#include "model.hpp"

#include <algorithm>
#include <cmath>

namespace nee {

Model::Model(ModelConfig cfg, uint64_t init_seed)
    : cfg_(std::move(cfg)), init_seed_(init_seed) {
  cfg_.validate();
  init_params();
}

uint64_t Model::params_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [name, t] : params_.by_name) {
    h = fnv1a64(name, h);
    h = fnv1a64(t.values().data(), t.size() * sizeof(double), h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// parameter construction

void Model::add_param(const std::string& name, Shape shape,
                      const std::function<double(Rng&)>& draw) {
  Rng rng(derive_seed(init_seed_, name));
  std::vector<double> vals(numel(shape));
  for (auto& v : vals) v = draw(rng);
  params_.by_name.emplace(name, Tensor(std::move(shape), std::move(vals), true));
}

void Model::add_linear(const std::string& prefix, size_t in, size_t out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  add_param(prefix + ".w", {in, out},
            [limit](Rng& r) { return r.uniform(-limit, limit); });
  add_param(prefix + ".b", {out}, [](Rng&) { return 0.0; });
}

void Model::add_norm(const std::string& prefix, size_t dim) {
  add_param(prefix + ".gain", {dim}, [](Rng&) { return 1.0; });
  add_param(prefix + ".bias", {dim}, [](Rng&) { return 0.0; });
}

void Model::add_attention(const std::string& prefix) {
  const size_t w = cfg_.width();
  if (cfg_.shared_projection) {
    add_linear(prefix + ".win", w, w);
  } else {
    add_linear(prefix + ".wq", w, w);
    add_linear(prefix + ".wk", w, w);
    add_linear(prefix + ".wv", w, w);
  }
  if (cfg_.attention != AttentionKind::DotProduct) {
    const size_t h = cfg_.attn_hidden;
    const double limit = std::sqrt(6.0 / static_cast<double>(w + h));
    add_param(prefix + ".score.w1", {w, h},
              [limit](Rng& r) { return r.uniform(-limit, limit); });
    add_param(prefix + ".score.w2", {w, h},
              [limit](Rng& r) { return r.uniform(-limit, limit); });
    add_param(prefix + ".score.b", {h}, [](Rng&) { return 0.0; });
    const double vlimit = std::sqrt(6.0 / static_cast<double>(h + 1));
    add_param(prefix + ".score.v", {h},
              [vlimit](Rng& r) { return r.uniform(-vlimit, vlimit); });
  }
  add_linear(prefix + ".wo", w, w);
}

void Model::init_params() {
  const size_t w = cfg_.width();
  switch (cfg_.input_encoding) {
    case InputEncoding::Binary: {
      const double s = 1.0 / std::sqrt(static_cast<double>(w));
      add_param("embed.bits", {cfg_.bit_width, w},
                [s](Rng& r) { return s * r.normal(); });
      add_param("embed.end", {1, w}, [s](Rng& r) { return s * r.normal(); });
      break;
    }
    case InputEncoding::OneHot: {
      const double s = 1.0 / std::sqrt(static_cast<double>(w));
      add_param("embed.vocab", {vocab_size(cfg_.bit_width), w},
                [s](Rng& r) { return s * r.normal(); });
      break;
    }
    case InputEncoding::BinaryRaw:
      break;  // tokens pass through as bits + end flag
  }
  for (size_t i = 0; i < cfg_.enc_layers; ++i) {
    const std::string p = "enc.b" + std::to_string(i);
    add_norm(p + ".ln1", w);
    add_attention(p + ".attn");
    add_norm(p + ".ln2", w);
    add_linear(p + ".ffn.l1", w, cfg_.ffn_hidden);
    add_linear(p + ".ffn.l2", cfg_.ffn_hidden, w);
  }
  add_norm("enc.final", w);
  for (size_t i = 0; i < cfg_.dec_layers; ++i) {
    const std::string p = "dec.b" + std::to_string(i);
    add_norm(p + ".ln1", w);
    add_attention(p + ".self");
    add_norm(p + ".ln2", w);
    add_attention(p + ".cross");
    add_norm(p + ".ln3", w);
    add_linear(p + ".ffn.l1", w, cfg_.ffn_hidden);
    add_linear(p + ".ffn.l2", cfg_.ffn_hidden, w);
  }
  add_norm("dec.final", w);
  if (cfg_.mode == ModelMode::Nee ||
      cfg_.output_encoding == OutputEncoding::Binary) {
    add_linear("head.value", w, static_cast<size_t>(cfg_.out_width) + 1);
  }
  if (cfg_.mode == ModelMode::Seq2Seq &&
      cfg_.output_encoding == OutputEncoding::OneHot) {
    add_linear("head.vocab", w, vocab_size(cfg_.bit_width));
  }
  if (cfg_.mode == ModelMode::Nee) {
    add_norm("mask.norm", 2);
    const size_t k = cfg_.mask_filter_size, f = cfg_.mask_filters;
    const double climit = std::sqrt(6.0 / static_cast<double>(k * 2 + k * f));
    add_param("mask.conv.k", {k, 2, f},
              [climit](Rng& r) { return r.uniform(-climit, climit); });
    add_param("mask.conv.b", {f}, [](Rng&) { return 0.0; });
    add_linear("mask.ffn.l1", f, cfg_.mask_ffn_hidden);
    add_linear("mask.ffn.l2", cfg_.mask_ffn_hidden, 1);
  }
}

// ---------------------------------------------------------------------------
// building blocks

Tensor Model::linear(Tape& tape, const std::string& prefix, const Tensor& x) const {
  Tensor y = tape.matmul(x, params_.at(prefix + ".w"));
  return tape.add_row_broadcast(y, params_.at(prefix + ".b"));
}

Tensor Model::ffn(Tape& tape, const std::string& prefix, const Tensor& x) const {
  Tensor h = tape.relu(linear(tape, prefix + ".l1", x));
  return linear(tape, prefix + ".l2", h);
}

Tensor Model::layer_norm(Tape& tape, const std::string& prefix,
                         const Tensor& x) const {
  return tape.normalize_rows(x, params_.at(prefix + ".gain"),
                             params_.at(prefix + ".bias"), cfg_.norm_eps);
}

Tensor Model::embed_tokens(Tape& tape, const std::vector<TokenId>& tokens) const {
  const size_t len = tokens.size();
  if (len == 0) fail(ErrorKind::InvalidArgument, "cannot embed an empty sequence");
  switch (cfg_.input_encoding) {
    case InputEncoding::Binary: {
      // bit matrix (L, n) times the per-bit vectors, plus the end-token row
      std::vector<double> bits(len * cfg_.bit_width, 0.0);
      std::vector<double> endsel(len, 0.0);
      for (size_t i = 0; i < len; ++i) {
        if (is_end(tokens[i])) {
          endsel[i] = 1.0;
          continue;
        }
        BitWord wrd = token_word(tokens[i], cfg_.bit_width);
        for (uint32_t b = 0; b < cfg_.bit_width; ++b) {
          bits[i * cfg_.bit_width + b] = wrd.bits[b];
        }
      }
      Tensor bit_matrix({len, cfg_.bit_width}, std::move(bits));
      Tensor end_indicator({len, 1}, std::move(endsel));
      Tensor emb = tape.matmul(bit_matrix, params_.at("embed.bits"));
      Tensor ende = tape.matmul(end_indicator, params_.at("embed.end"));
      return tape.add(emb, ende);
    }
    case InputEncoding::OneHot: {
      const size_t v = vocab_size(cfg_.bit_width);
      std::vector<double> onehot(len * v, 0.0);
      for (size_t i = 0; i < len; ++i) {
        onehot[i * v + token_vocab_index(tokens[i], cfg_.bit_width)] = 1.0;
      }
      Tensor sel({len, v}, std::move(onehot));
      return tape.matmul(sel, params_.at("embed.vocab"));
    }
    case InputEncoding::BinaryRaw: {
      const size_t w = cfg_.width();
      std::vector<double> raw(len * w, 0.0);
      for (size_t i = 0; i < len; ++i) {
        if (is_end(tokens[i])) {
          raw[i * w + cfg_.bit_width] = 1.0;
          continue;
        }
        BitWord wrd = token_word(tokens[i], cfg_.bit_width);
        for (uint32_t b = 0; b < cfg_.bit_width; ++b) raw[i * w + b] = wrd.bits[b];
      }
      return Tensor({len, w}, std::move(raw));
    }
  }
  fail(ErrorKind::Internal, "unreachable input encoding");
}

Tensor Model::attention_scores(Tape& tape, const Tensor& q, const Tensor& k,
                               const std::string& prefix) const {
  if (q.rank() != 2 || k.rank() != 2 || q.dim(1) != k.dim(1)) {
    fail(ErrorKind::InvalidArgument, "attention_scores: dimension mismatch");
  }
  if (cfg_.attention == AttentionKind::DotProduct) {
    Tensor s = tape.matmul(q, k, false, true);
    return tape.scale(s, 1.0 / std::sqrt(static_cast<double>(q.dim(1))));
  }
  const Tensor& w1 = params_.at(prefix + ".score.w1");
  const Tensor& w2 = params_.at(prefix + ".score.w2");
  const Tensor& b = params_.at(prefix + ".score.b");
  const Tensor& v = params_.at(prefix + ".score.v");
  auto mlp_scores = [&](const Tensor& qq, const Tensor& kk) {
    Tensor a = tape.add_row_broadcast(tape.matmul(qq, w1), b);
    Tensor c = tape.matmul(kk, w2);
    Tensor t = tape.tanh_act(tape.outer_add(a, c));
    return tape.contract_last(t, v);  // (Lq, Lk)
  };
  Tensor s1 = mlp_scores(q, k);
  if (cfg_.attention == AttentionKind::Mlp) return s1;
  // flip the argument order and average the logits; when q and k are the
  // same tensor the flipped pass is just the transpose of the first
  Tensor s2 = q.id() == k.id() ? s1 : mlp_scores(k, q);  // (Lk, Lq)
  return tape.scale(tape.add(s1, tape.transpose2d(s2)), 0.5);
}

Model::AttnOut Model::attend(Tape& tape, const std::string& prefix,
                             const Tensor& q_in, const Tensor& kv_in,
                             const Mask* key_ignore, bool causal) const {
  Tensor q, k, v;
  if (cfg_.shared_projection) {
    q = linear(tape, prefix + ".win", q_in);
    if (kv_in.id() == q_in.id()) {
      k = q;
    } else {
      k = linear(tape, prefix + ".win", kv_in);
    }
    v = k;
  } else {
    q = linear(tape, prefix + ".wq", q_in);
    k = linear(tape, prefix + ".wk", kv_in);
    v = linear(tape, prefix + ".wv", kv_in);
  }
  AttnOut out;
  out.scores = attention_scores(tape, q, k, prefix);
  out.weights = causal ? tape.softmax_rows_causal(out.scores)
                       : tape.softmax_rows(out.scores, key_ignore);
  Tensor mixed = tape.matmul(out.weights, v);
  out.out = linear(tape, prefix + ".wo", mixed);
  return out;
}

Tensor Model::encoder_block(Tape& tape, size_t layer, const Tensor& x,
                            const Mask& ignore) const {
  const std::string p = "enc.b" + std::to_string(layer);
  const double rho = cfg_.residual_scale;
  Tensor h = layer_norm(tape, p + ".ln1", x);
  AttnOut a = attend(tape, p + ".attn", h, h, &ignore, false);
  Tensor x1 = tape.add(tape.scale(x, rho), tape.dropout(a.out));
  Tensor h2 = layer_norm(tape, p + ".ln2", x1);
  Tensor f = ffn(tape, p + ".ffn", h2);
  return tape.add(tape.scale(x1, rho), tape.dropout(f));
}

Tensor Model::encoder_forward(Tape& tape, const Tensor& embedded,
                              const Mask& ignore) const {
  if (embedded.dim(0) != ignore.size()) {
    fail(ErrorKind::InvalidArgument, "encoder_forward: mask length mismatch");
  }
  if (count_considered(ignore) == 0) {
    fail(ErrorKind::InvalidArgument,
         "encoder_forward: every position is masked");
  }
  Tensor x = embedded;
  for (size_t i = 0; i < cfg_.enc_layers; ++i) {
    x = encoder_block(tape, i, x, ignore);
  }
  return layer_norm(tape, "enc.final", x);
}

Tensor Model::decoder_block(Tape& tape, size_t layer, const Tensor& x,
                            const Tensor& enc, const Mask& enc_ignore,
                            bool causal, AttnOut* cross) const {
  const std::string p = "dec.b" + std::to_string(layer);
  const double rho = cfg_.residual_scale;
  Tensor h = layer_norm(tape, p + ".ln1", x);
  AttnOut self = attend(tape, p + ".self", h, h, nullptr, causal);
  Tensor x1 = tape.add(tape.scale(x, rho), tape.dropout(self.out));
  Tensor h2 = layer_norm(tape, p + ".ln2", x1);
  AttnOut c = attend(tape, p + ".cross", h2, enc, &enc_ignore, false);
  if (cross) *cross = c;
  Tensor x2 = tape.add(tape.scale(x1, rho), tape.dropout(c.out));
  Tensor h3 = layer_norm(tape, p + ".ln3", x2);
  Tensor f = ffn(tape, p + ".ffn", h3);
  return tape.add(tape.scale(x2, rho), tape.dropout(f));
}

Tensor Model::decode_stack(Tape& tape, const Tensor& dec_in, const Tensor& enc,
                           const Mask& enc_ignore, bool causal,
                           AttnOut* last_cross) const {
  Tensor x = dec_in;
  for (size_t i = 0; i < cfg_.dec_layers; ++i) {
    AttnOut cross;
    x = decoder_block(tape, i, x, enc, enc_ignore, causal, &cross);
    if (i + 1 == cfg_.dec_layers && last_cross) *last_cross = cross;
  }
  return layer_norm(tape, "dec.final", x);
}

Tensor Model::value_head(Tape& tape, const Tensor& state) const {
  return linear(tape, "head.value", state);
}

Tensor Model::vocab_head(Tape& tape, const Tensor& states) const {
  return linear(tape, "head.vocab", states);
}

DecoderOutput Model::decoder_forward(Tape& tape, const Tensor& enc_states,
                                     const Mask& ignore) const {
  if (cfg_.mode != ModelMode::Nee) {
    fail(ErrorKind::InvalidArgument,
         "decoder_forward is the NEE path; use seq2seq decoding instead");
  }
  // Single decode step fed with the zero vector (the start token s = 0).
  Tensor dec_in = Tensor::zeros({1, cfg_.width()});
  AttnOut cross;
  Tensor state = decode_stack(tape, dec_in, enc_states, ignore, true, &cross);
  DecoderOutput out;
  out.value_logits = tape.select_row(value_head(tape, state), 0);
  out.pointer_logits = tape.select_row(cross.scores, 0);
  out.pointer = tape.select_row(cross.weights, 0);
  return out;
}

MaskUpdateOut Model::mask_update(Tape& tape, const Mask& current,
                                 const std::vector<double>& pointer_onehot) const {
  if (cfg_.mode != ModelMode::Nee) {
    fail(ErrorKind::InvalidArgument, "mask_update requires NEE mode");
  }
  const size_t len = current.size();
  if (pointer_onehot.size() != len) {
    fail(ErrorKind::InvalidArgument, "mask_update: length mismatch");
  }
  std::vector<double> bi(len);
  for (size_t i = 0; i < len; ++i) bi[i] = static_cast<double>(current[i]);
  Tensor b_i({len, 1}, std::move(bi));
  Tensor b_p({len, 1}, pointer_onehot);
  Tensor x = tape.concat_cols(b_i, b_p);  // (L, 2)
  Tensor n = tape.normalize_rows(x, params_.at("mask.norm.gain"),
                                 params_.at("mask.norm.bias"), cfg_.norm_eps);
  Tensor c = tape.conv1d_same(n, params_.at("mask.conv.k"),
                              params_.at("mask.conv.b"));
  Tensor f = ffn(tape, "mask.ffn", c);  // (L, 1)
  MaskUpdateOut out;
  out.logits = f.reshape({len});
  out.probs = tape.sigmoid(out.logits);
  return out;
}

// ---------------------------------------------------------------------------
// losses

std::vector<double> Model::value_targets(TokenId target,
                                         std::vector<double>* weights) const {
  const size_t n = cfg_.out_width;
  std::vector<double> t(n + 1, 0.0);
  weights->assign(n + 1, 1.0);
  if (is_end(target)) {
    // supervise only the end logit; bit values are not defined for e
    t[n] = 1.0;
    for (size_t i = 0; i < n; ++i) (*weights)[i] = 0.0;
    return t;
  }
  BitWord w = encode_uint(static_cast<uint64_t>(target), cfg_.out_width);
  for (size_t i = 0; i < n; ++i) t[i] = w.bits[i];
  return t;
}

StepLoss Model::nee_example_loss(Tape& tape, const TraceStep& step) const {
  Tensor emb = embed_tokens(tape, step.tokens);
  Tensor enc = encoder_forward(tape, emb, step.mask);
  DecoderOutput dec = decoder_forward(tape, enc, step.mask);

  StepLoss parts;
  std::vector<double> weights;
  std::vector<double> targets = value_targets(step.target_value, &weights);
  Tensor loss = tape.bce_logits(dec.value_logits, targets, weights);
  parts.value = loss.scalar_value();
  if (step.has_pointer()) {
    Tensor pl = tape.masked_ce(dec.pointer_logits, &step.mask,
                               static_cast<size_t>(step.target_pointer));
    parts.pointer = pl.scalar_value();
    loss = tape.add(loss, pl);
  }
  if (step.has_next_mask()) {
    if (!step.has_pointer()) {
      fail(ErrorKind::InvalidArgument,
           "trace step supervises a next mask without a pointer target");
    }
    std::vector<double> onehot(step.tokens.size(), 0.0);
    onehot[static_cast<size_t>(step.target_pointer)] = 1.0;
    MaskUpdateOut mu = mask_update(tape, step.mask, onehot);
    std::vector<double> mt(step.target_next_mask.size());
    for (size_t i = 0; i < mt.size(); ++i) {
      mt[i] = static_cast<double>(step.target_next_mask[i]);
    }
    std::vector<double> mw(mt.size(), 1.0);
    Tensor ml = tape.bce_logits(mu.logits, mt, mw);
    parts.mask = ml.scalar_value();
    loss = tape.add(loss, ml);
  }
  parts.total = loss;
  return parts;
}

std::vector<TokenId> Model::sorted_targets(const std::vector<TokenId>& tokens) {
  std::vector<TokenId> nums;
  for (TokenId t : tokens) {
    if (!is_end(t)) nums.push_back(t);
  }
  std::sort(nums.begin(), nums.end());
  nums.push_back(kEndToken);
  return nums;
}

StepLoss Model::seq2seq_example_loss(Tape& tape,
                                     const std::vector<TokenId>& tokens) const {
  if (cfg_.mode != ModelMode::Seq2Seq) {
    fail(ErrorKind::InvalidArgument, "seq2seq loss requires baseline mode");
  }
  Mask enc_ignore(tokens.size(), 0);
  Tensor enc = encoder_forward(tape, embed_tokens(tape, tokens), enc_ignore);

  const std::vector<TokenId> targets = sorted_targets(tokens);
  // teacher forcing: decoder sees s followed by the partially sorted output
  std::vector<TokenId> dec_tokens(targets.size());
  dec_tokens[0] = 0;  // s = 0
  for (size_t i = 0; i + 1 < targets.size(); ++i) dec_tokens[i + 1] = targets[i];
  Tensor dec_in = embed_tokens(tape, dec_tokens);
  Tensor states = decode_stack(tape, dec_in, enc, enc_ignore, true, nullptr);

  StepLoss parts;
  Tensor loss = Tensor::scalar(0.0);
  bool first = true;
  if (cfg_.output_encoding == OutputEncoding::OneHot) {
    Tensor logits = vocab_head(tape, states);  // (T, V)
    for (size_t t = 0; t < targets.size(); ++t) {
      Tensor row = tape.select_row(logits, t);
      Tensor ce = tape.masked_ce(row, nullptr,
                                 token_vocab_index(targets[t], cfg_.bit_width));
      loss = first ? ce : tape.add(loss, ce);
      first = false;
    }
  } else {
    Tensor logits = value_head(tape, states);  // (T, out+1)
    for (size_t t = 0; t < targets.size(); ++t) {
      std::vector<double> w;
      std::vector<double> tv = value_targets(targets[t], &w);
      Tensor ce = tape.bce_logits(tape.select_row(logits, t), tv, w);
      loss = first ? ce : tape.add(loss, ce);
      first = false;
    }
  }
  parts.value = loss.scalar_value();
  parts.total = loss;
  return parts;
}

// ---------------------------------------------------------------------------
// inference

TokenId Model::value_from_probs(const std::vector<double>& probs) const {
  const size_t n = cfg_.out_width;
  if (probs[n] > cfg_.bit_threshold) return kEndToken;
  uint64_t v = 0;
  for (size_t i = 0; i < n; ++i) {
    if (probs[i] > cfg_.bit_threshold) v |= (1ull << i);
  }
  return static_cast<TokenId>(v);
}

NeeStepResult Model::nee_step(const std::vector<TokenId>& tokens,
                              const Mask& ignore) const {
  if (count_considered(ignore) == 0) {
    fail(ErrorKind::InvalidArgument, "nee_step: every position is masked");
  }
  Tape tape(false);
  Tensor enc = encoder_forward(tape, embed_tokens(tape, tokens), ignore);
  DecoderOutput dec = decoder_forward(tape, enc, ignore);

  NeeStepResult res;
  Tensor vp = tape.sigmoid(dec.value_logits);
  res.value_probs = vp.values();
  res.value = value_from_probs(res.value_probs);
  res.pointer_dist = dec.pointer.values();
  res.pointer = argmax(res.pointer_dist);

  std::vector<double> onehot(tokens.size(), 0.0);
  onehot[res.pointer] = 1.0;
  MaskUpdateOut mu = mask_update(tape, ignore, onehot);
  res.mask_probs = mu.probs.values();
  res.next_mask.resize(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    res.next_mask[i] = res.mask_probs[i] > cfg_.mask_threshold ? 1 : 0;
  }
  return res;
}

NeeRunResult Model::nee_run(const std::vector<TokenId>& tokens) const {
  if (tokens.empty() || !is_end(tokens.back())) {
    fail(ErrorKind::InvalidArgument, "nee_run: input must be end-delimited");
  }
  NeeRunResult run;
  Mask mask(tokens.size(), 0);
  const size_t budget = 2 * tokens.size();
  for (size_t step = 0; step < budget; ++step) {
    NeeStepResult r = nee_step(tokens, mask);
    run.pointer_rows.push_back(r.pointer_dist);
    ++run.steps;
    if (is_end(r.value)) {
      run.terminated = true;
      break;
    }
    run.outputs.push_back(r.value);
    if (count_considered(r.next_mask) == 0) break;  // nothing left to attend to
    mask = r.next_mask;
  }
  return run;
}

Seq2SeqResult Model::seq2seq_decode(const std::vector<TokenId>& tokens) const {
  if (cfg_.mode != ModelMode::Seq2Seq) {
    fail(ErrorKind::InvalidArgument, "seq2seq_decode requires baseline mode");
  }
  Mask enc_ignore(tokens.size(), 0);
  Tape enc_tape(false);
  Tensor enc =
      encoder_forward(enc_tape, embed_tokens(enc_tape, tokens), enc_ignore);

  Seq2SeqResult res;
  std::vector<TokenId> dec_tokens{0};  // start token s = 0
  const size_t budget = 2 * tokens.size();
  for (size_t step = 0; step < budget; ++step) {
    Tape tape(false);
    AttnOut cross;
    Tensor states = decode_stack(tape, embed_tokens(tape, dec_tokens), enc,
                                 enc_ignore, true, &cross);
    const size_t last = dec_tokens.size() - 1;
    Tensor att_row = tape.select_row(cross.weights, last);
    res.attention_rows.push_back(att_row.values());

    TokenId next;
    if (cfg_.output_encoding == OutputEncoding::OneHot) {
      Tensor row = tape.select_row(vocab_head(tape, states), last);
      const size_t idx = argmax(row.values());
      next = idx == vocab_size(cfg_.bit_width) - 1
                 ? kEndToken
                 : static_cast<TokenId>(idx);
    } else {
      Tensor row = tape.sigmoid(tape.select_row(value_head(tape, states), last));
      next = value_from_probs(row.values());
    }
    if (is_end(next)) {
      res.terminated = true;
      break;
    }
    res.outputs.push_back(next);
    dec_tokens.push_back(next);
  }
  return res;
}

}  // namespace nee
