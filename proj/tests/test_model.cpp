#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "gradcheck.hpp"
#include "model.hpp"

using namespace nee;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d = 8;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn_hidden = 16;
  cfg.attn_hidden = 8;
  cfg.mask_filters = 4;
  cfg.mask_ffn_hidden = 4;
  cfg.dropout = 0.0;
  return cfg;
}

Tensor rand_mat(Shape shape, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(-1, 1);
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace

TEST_CASE("symmetrized MLP attention is symmetric by construction") {
  ModelConfig cfg = tiny_config();
  Model model(cfg, 7);
  Rng rng(11);
  Tensor q = rand_mat({5, cfg.d}, rng);
  Tensor k = rand_mat({5, cfg.d}, rng);
  Tape tape(false);
  Tensor s_qk = model.attention_scores(tape, q, k, "enc.b0.attn");
  Tensor s_kq = model.attention_scores(tape, k, q, "enc.b0.attn");
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) {
      CHECK(s_qk.at(i * 5 + j) == s_kq.at(j * 5 + i));
    }
  }
  // self-attention scores over one list form a symmetric matrix
  Tensor s_self = model.attention_scores(tape, q, q, "enc.b0.attn");
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) {
      CHECK(s_self.at(i * 5 + j) == s_self.at(j * 5 + i));
    }
  }
}

TEST_CASE("dot-product attention on unit vectors gives 1/sqrt(d)") {
  ModelConfig cfg = tiny_config();
  cfg.attention = AttentionKind::DotProduct;
  cfg.shared_projection = false;
  cfg.mode = ModelMode::Seq2Seq;
  cfg.output_encoding = OutputEncoding::OneHot;
  cfg.input_encoding = InputEncoding::OneHot;
  Model model(cfg, 3);
  std::vector<double> unit(cfg.d, 0.0);
  unit[0] = 1.0;
  Tensor q({1, cfg.d}, unit);
  Tape tape(false);
  Tensor s = model.attention_scores(tape, q, q, "enc.b0.attn");
  CHECK(s.at(0) == doctest::Approx(1.0 / std::sqrt(double(cfg.d))));
}

TEST_CASE("attention over a single unmasked key concentrates fully") {
  Model model(tiny_config(), 7);
  std::vector<TokenId> tokens{9, 55, kEndToken};
  Mask ignore{1, 0, 1};
  Tape tape(false);
  Tensor enc = model.encoder_forward(tape, model.embed_tokens(tape, tokens), ignore);
  DecoderOutput out = model.decoder_forward(tape, enc, ignore);
  CHECK(out.pointer.at(0) == 0.0);
  CHECK(out.pointer.at(1) == 1.0);
  CHECK(out.pointer.at(2) == 0.0);
}

TEST_CASE("pointer head is a valid distribution, zero on masked positions") {
  Model model(tiny_config(), 21);
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const size_t n = 2 + rng.below(7);
    std::vector<TokenId> tokens;
    for (size_t i = 0; i < n; ++i) {
      tokens.push_back(static_cast<TokenId>(rng.below(256)));
    }
    tokens.push_back(kEndToken);
    Mask mask(tokens.size(), 0);
    for (auto& b : mask) b = rng.bernoulli(0.3) ? 1 : 0;
    if (count_considered(mask) == 0) mask[0] = 0;
    Tape tape(false);
    Tensor enc = model.encoder_forward(tape, model.embed_tokens(tape, tokens), mask);
    DecoderOutput out = model.decoder_forward(tape, enc, mask);
    double sum = 0.0;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (mask[i]) {
        CHECK(out.pointer.at(i) == 0.0);
      } else {
        CHECK(out.pointer.at(i) >= 0.0);
        sum += out.pointer.at(i);
      }
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("no positional encoding: outputs are permutation equivariant") {
  Model model(tiny_config(), 13);
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const size_t n = 3 + rng.below(5);
    std::vector<TokenId> tokens;
    for (size_t i = 0; i < n; ++i) {
      tokens.push_back(static_cast<TokenId>(rng.below(256)));
    }
    tokens.push_back(kEndToken);
    Mask mask(tokens.size(), 0);
    for (size_t i = 0; i < n; ++i) mask[i] = rng.bernoulli(0.3) ? 1 : 0;
    if (count_considered(mask) == 0) mask[0] = 0;

    // permute the number positions (the trailing delimiter stays put)
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<TokenId> ptokens(tokens.size());
    Mask pmask(mask.size());
    for (size_t i = 0; i < n; ++i) {
      ptokens[i] = tokens[perm[i]];
      pmask[i] = mask[perm[i]];
    }
    ptokens[n] = kEndToken;
    pmask[n] = mask[n];

    NeeStepResult a = model.nee_step(tokens, mask);
    NeeStepResult b = model.nee_step(ptokens, pmask);
    // discrete outputs agree exactly; the pointed-at token is the same
    CHECK(a.value == b.value);
    CHECK(tokens[a.pointer] == ptokens[b.pointer]);
    // continuous outputs agree up to float reassociation
    for (size_t i = 0; i < n; ++i) {
      CHECK(a.pointer_dist[perm[i]] ==
            doctest::Approx(b.pointer_dist[i]).epsilon(1e-12));
    }
    CHECK(a.pointer_dist[n] == doctest::Approx(b.pointer_dist[n]).epsilon(1e-12));
  }
}

TEST_CASE("residual toggle scales the skip path exactly") {
  // zero the sublayer output projections so a block reduces to x -> rho^2 * x
  for (double rho : {1.0, 1.5}) {
    ModelConfig cfg = tiny_config();
    cfg.residual_scale = rho;
    Model model(cfg, 5);
    for (auto& [name, t] : model.params().by_name) {
      if (name.find(".wo.") != std::string::npos ||
          name.find(".ffn.l2.") != std::string::npos) {
        t = Tensor::zeros(t.shape(), true);
      }
    }
    Rng rng(9);
    Tensor x = rand_mat({4, cfg.d}, rng);
    Tape tape(false);
    Mask mask(4, 0);
    Tensor direct = model.encoder_forward(tape, x, mask);
    Tensor scaled = tape.normalize_rows(
        tape.scale(x, rho * rho), model.params().at("enc.final.gain"),
        model.params().at("enc.final.bias"), cfg.norm_eps);
    for (size_t i = 0; i < direct.size(); ++i) {
      CHECK(direct.at(i) == doctest::Approx(scaled.at(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("architecture toggles change exactly one property each") {
  const ModelConfig base = apply_variant("all_mod", 8, 16);
  auto count_diffs = [](const nlohmann::json& a, const nlohmann::json& b) {
    int diffs = 0;
    for (auto& [k, v] : a.items()) {
      if (b.at(k) != v) ++diffs;
    }
    return diffs;
  };
  CHECK(count_diffs(base.to_json(), apply_variant("all_mod-C1", 8, 16).to_json()) == 1);
  CHECK(apply_variant("all_mod-C1", 8, 16).residual_scale == 1.0);
  CHECK(count_diffs(base.to_json(), apply_variant("all_mod-C2", 8, 16).to_json()) == 1);
  CHECK(apply_variant("all_mod-C2", 8, 16).attention == AttentionKind::DotProduct);
  CHECK(count_diffs(base.to_json(), apply_variant("all_mod-C3", 8, 16).to_json()) == 1);
  CHECK(apply_variant("all_mod-C3", 8, 16).attention == AttentionKind::Mlp);
  CHECK(count_diffs(base.to_json(), apply_variant("all_mod-C4", 8, 16).to_json()) == 1);
  CHECK_FALSE(apply_variant("all_mod-C4", 8, 16).shared_projection);
  CHECK(count_diffs(base.to_json(), apply_variant("all_mod-C5", 8, 16).to_json()) == 1);
  CHECK(apply_variant("all_mod-C5", 8, 16).input_encoding == InputEncoding::OneHot);
  CHECK(apply_variant("all_mod+C6", 8, 16).input_encoding == InputEncoding::BinaryRaw);
  const ModelConfig vanilla = apply_variant("vanilla", 8, 16);
  CHECK(vanilla.attention == AttentionKind::DotProduct);
  CHECK(vanilla.residual_scale == 1.0);
  CHECK(vanilla.input_encoding == InputEncoding::OneHot);
  CHECK(apply_variant("vanilla+C5", 8, 16).input_encoding == InputEncoding::Binary);
  CHECK(apply_variant("all_mod:binout", 8, 16).output_encoding ==
        OutputEncoding::Binary);
  CHECK_THROWS_AS(apply_variant("nonsense", 8, 16), Error);
}

TEST_CASE("mask update is shift invariant away from the boundaries") {
  ModelConfig cfg = tiny_config();
  Model model(cfg, 31);
  const size_t len = 12;
  Mask b_i(len, 0);
  b_i[3] = 1;
  b_i[4] = 1;
  std::vector<double> b_p(len, 0.0);
  b_p[5] = 1.0;
  Mask b_i_shift(len, 0);
  b_i_shift[4] = 1;
  b_i_shift[5] = 1;
  std::vector<double> b_p_shift(len, 0.0);
  b_p_shift[6] = 1.0;

  Tape tape(false);
  MaskUpdateOut a = model.mask_update(tape, b_i, b_p);
  MaskUpdateOut b = model.mask_update(tape, b_i_shift, b_p_shift);
  for (size_t i = 2; i + 2 < len; ++i) {
    CHECK(a.logits.at(i) == doctest::Approx(b.logits.at(i + 1)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(model.mask_update(tape, b_i, std::vector<double>(len - 1, 0.0)),
                  Error);
}

TEST_CASE("untrained decoder output is a frozen regression fixture") {
  Model model(tiny_config(), 12345);
  std::vector<TokenId> tokens{5, 2, kEndToken};
  Mask mask{0, 0, 0};
  Tape tape(false);
  Tensor enc = model.encoder_forward(tape, model.embed_tokens(tape, tokens), mask);
  DecoderOutput dec = model.decoder_forward(tape, enc, mask);
  const std::vector<double> want_logits{
      -0.61378219289224567, 1.4284509339344018,   -0.39599594082459155,
      -0.20394280447440938, 0.19888195207912282,  -0.43393033850890211,
      -0.91330544132322156, -0.18052556936500064, 0.015556829018046475};
  const std::vector<double> want_pointer{0.43929674697961502,
                                         0.27508290719928641,
                                         0.28562034582109852};
  REQUIRE(dec.value_logits.size() == want_logits.size());
  for (size_t i = 0; i < want_logits.size(); ++i) {
    CHECK(dec.value_logits.at(i) == doctest::Approx(want_logits[i]).epsilon(1e-12));
  }
  for (size_t i = 0; i < want_pointer.size(); ++i) {
    CHECK(dec.pointer.at(i) == doctest::Approx(want_pointer[i]).epsilon(1e-12));
  }
}

TEST_CASE("full NEE loss gradcheck on a 3-token input") {
  ModelConfig cfg = tiny_config();
  Model model(cfg, 12345);
  TraceStep st;
  st.tokens = {5, 2, kEndToken};
  st.mask = {0, 0, 0};
  st.target_value = 2;
  st.target_pointer = 1;
  st.target_next_mask = {0, 1, 0};

  // jitter off the init point: the zero decoder input plus zero biases parks
  // relu inputs exactly at their kink there
  std::vector<Tensor> point;
  Rng jit(4242);
  for (auto& [name, t] : model.params().by_name) {
    std::vector<double> v = t.values();
    for (auto& x : v) x += 0.05 * jit.normal();
    point.emplace_back(t.shape(), std::move(v), true);
  }
  GradCheckReport rep = grad_check(
      [&](Tape& tape, const std::vector<Tensor>& p) {
        Model m(cfg, 12345);
        size_t i = 0;
        for (auto& [name, t] : m.params().by_name) t = p[i++];
        tape.set_dropout(true, 0.1, 77);
        return m.nee_example_loss(tape, st).total;
      },
      point, 1e-5, 1e-4);
  CHECK(rep.pass);
  CHECK(rep.max_rel_error < 1e-4);
}

TEST_CASE("all-masked encoder input is rejected") {
  Model model(tiny_config(), 3);
  CHECK_THROWS_AS(model.nee_step({5, 2, kEndToken}, Mask{1, 1, 1}), Error);
}

TEST_CASE("nee_run stays within budget and exposes pointer rows") {
  Model model(tiny_config(), 17);
  NeeRunResult r = model.nee_run({7, 3, 200, kEndToken});
  CHECK(r.steps <= 8);
  for (const auto& row : r.pointer_rows) {
    double sum = 0.0;
    for (double v : row) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(model.nee_run({7, 3}), Error);  // not end-delimited
}

TEST_CASE("seq2seq baseline decodes deterministically with stochastic rows") {
  ModelConfig cfg = apply_variant("vanilla", 8, 12);
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn_hidden = 16;
  cfg.attn_hidden = 8;
  cfg.dropout = 0.0;
  Model model(cfg, 23);
  std::vector<TokenId> tokens{9, 1, 77, kEndToken};
  Seq2SeqResult a = model.seq2seq_decode(tokens);
  Seq2SeqResult b = model.seq2seq_decode(tokens);
  CHECK(a.outputs == b.outputs);
  REQUIRE(!a.attention_rows.empty());
  for (const auto& row : a.attention_rows) {
    double sum = 0.0;
    for (double v : row) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  Tape tape(true);
  tape.set_dropout(true, cfg.dropout, 5);
  StepLoss loss = model.seq2seq_example_loss(tape, tokens);
  CHECK(std::isfinite(loss.value));
  tape.backward(loss.total);
}

TEST_CASE("checkpoint round trip is exact and rejects mismatches") {
  ModelConfig cfg = tiny_config();
  Model model(cfg, 99);
  Checkpoint ckpt;
  ckpt.meta["model"] = cfg.to_json();
  ckpt.meta["seed"] = 99;
  ckpt.meta["step"] = 0;
  ckpt.params = model.params();
  const std::string path = "test_ckpt_roundtrip.nee";
  save_checkpoint(path, ckpt);

  Checkpoint back = load_checkpoint(path);
  Model loaded = model_from_checkpoint(back);
  CHECK(loaded.params_hash() == model.params_hash());
  for (auto& [name, t] : model.params().by_name) {
    CHECK(loaded.params().at(name).values() == t.values());  // bitwise
  }
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<TokenId> tokens;
    const size_t n = 2 + rng.below(5);
    for (size_t i = 0; i < n; ++i) {
      tokens.push_back(static_cast<TokenId>(rng.below(256)));
    }
    tokens.push_back(kEndToken);
    Mask mask(tokens.size(), 0);
    NeeStepResult a = model.nee_step(tokens, mask);
    NeeStepResult b = loaded.nee_step(tokens, mask);
    CHECK(a.value == b.value);
    CHECK(a.pointer == b.pointer);
    CHECK(a.pointer_dist == b.pointer_dist);
  }

  {
    std::ifstream f(path, std::ios::binary);
    std::string buf((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    std::ofstream g("test_ckpt_trunc.nee", std::ios::binary);
    g.write(buf.data(), static_cast<std::streamsize>(buf.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint("test_ckpt_trunc.nee"), Error);

  ModelConfig other = cfg;
  other.bit_width = 12;
  other.out_width = 12;
  CHECK_THROWS_AS(load_checkpoint_expect(path, other), Error);
  CHECK_NOTHROW(load_checkpoint_expect(path, cfg));

  std::remove(path.c_str());
  std::remove("test_ckpt_trunc.nee");
}

TEST_CASE("save -> load -> save is byte identical") {
  ModelConfig cfg = tiny_config();
  Model model(cfg, 42);
  Checkpoint ckpt;
  ckpt.meta["model"] = cfg.to_json();
  ckpt.meta["seed"] = 42;
  ckpt.params = model.params();
  save_checkpoint("test_ckpt_a.nee", ckpt);
  Checkpoint loaded = load_checkpoint("test_ckpt_a.nee");
  save_checkpoint("test_ckpt_b.nee", loaded);
  std::ifstream fa("test_ckpt_a.nee", std::ios::binary);
  std::ifstream fb("test_ckpt_b.nee", std::ios::binary);
  std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(a == b);
  std::remove("test_ckpt_a.nee");
  std::remove("test_ckpt_b.nee");
}

TEST_CASE("desk and paper scale share the parameter-name layout") {
  TrainConfig desk = default_train_config("selection-sort", "desk");
  TrainConfig paper = default_train_config("selection-sort", "paper");
  CHECK(desk.model.enc_layers < paper.model.enc_layers);
  Model dm(desk.model, 1);
  Model pm(paper.model, 1);
  for (auto& [name, t] : dm.params().by_name) {
    REQUIRE(pm.params().contains(name));
    CHECK(pm.params().at(name).rank() == t.rank());
  }
}
