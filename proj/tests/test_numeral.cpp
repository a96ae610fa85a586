#include <doctest.h>

#include "bits.hpp"
#include "config.hpp"
#include "model.hpp"

using namespace nee;

TEST_CASE("binary encoding is LSB-first") {
  BitWord w = encode_uint(9, 8);
  CHECK(w.bits == std::vector<uint8_t>{1, 0, 0, 1, 0, 0, 0, 0});
  CHECK(encode_uint(0, 8).bits == std::vector<uint8_t>(8, 0));
  CHECK(encode_uint(255, 8).bits == std::vector<uint8_t>(8, 1));
  CHECK_THROWS_AS(encode_uint(256, 8), Error);
}

TEST_CASE("decode inverts encode, end token decodes to the end marker") {
  CHECK(decode_bits(encode_uint(9, 8)) == 9);
  CHECK_FALSE(decode_bits(end_word(8)).has_value());
  for (uint64_t v = 0; v < 256; ++v) {
    CHECK(decode_bits(encode_uint(v, 8)) == v);
  }
  for (uint64_t v = 0; v < 4096; ++v) {
    CHECK(decode_bits(encode_uint(v, 12)) == v);
  }
}

TEST_CASE("one-hot encoding") {
  auto v = one_hot_encode(0, 257);
  CHECK(v[0] == 1.0);
  auto e = one_hot_encode(256, 257);
  CHECK(e[256] == 1.0);
  for (size_t i = 0; i < 257; i += 13) {
    auto x = one_hot_encode(i, 257);
    double sum = 0.0;
    for (double c : x) sum += c;
    CHECK(sum == 1.0);
  }
  CHECK_THROWS_AS(one_hot_encode(257, 257), Error);
  CHECK(token_vocab_index(kEndToken, 8) == 256);
  CHECK(vocab_size(8) == 257);
}

TEST_CASE("bitwise embedding is the linear map over bits") {
  ModelConfig cfg;
  cfg.d = 8;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.ffn_hidden = 8;
  cfg.attn_hidden = 4;
  Model model(cfg, 321);
  const Tensor& table = model.params().at("embed.bits");
  const size_t d = cfg.d;

  Tape tape(false);
  // a word with bits {0, 3} embeds to v0 + v3
  Tensor e9 = model.embed_tokens(tape, {9});
  for (size_t j = 0; j < d; ++j) {
    CHECK(e9.at(j) ==
          doctest::Approx(table.at(0 * d + j) + table.at(3 * d + j)).epsilon(1e-12));
  }
  // the all-zero word (the start token s = 0) embeds to the zero vector
  Tensor e0 = model.embed_tokens(tape, {0});
  for (size_t j = 0; j < d; ++j) CHECK(e0.at(j) == 0.0);

  // linearity over disjoint bit sets: emb(a) + emb(b) = emb(a | b)
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    uint32_t a = static_cast<uint32_t>(rng.below(256));
    uint32_t b = static_cast<uint32_t>(rng.below(256)) & ~a;
    Tensor ea = model.embed_tokens(tape, {static_cast<TokenId>(a)});
    Tensor eb = model.embed_tokens(tape, {static_cast<TokenId>(b)});
    Tensor eab = model.embed_tokens(tape, {static_cast<TokenId>(a | b)});
    for (size_t j = 0; j < d; ++j) {
      CHECK(eab.at(j) == doctest::Approx(ea.at(j) + eb.at(j)).epsilon(1e-12));
    }
  }

  // matrix-product route agrees with the bitwise sum exactly
  for (uint32_t v : {1u, 37u, 200u, 255u}) {
    Tensor ev = model.embed_tokens(tape, {static_cast<TokenId>(v)});
    for (size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (uint32_t bit = 0; bit < 8; ++bit) {
        if ((v >> bit) & 1) acc += table.at(bit * d + j);
      }
      CHECK(ev.at(j) == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  // the end token uses its own learned vector
  Tensor ee = model.embed_tokens(tape, {kEndToken});
  const Tensor& endv = model.params().at("embed.end");
  for (size_t j = 0; j < d; ++j) CHECK(ee.at(j) == endv.at(j));
  // and that vector is a free parameter, distinct from every number embedding
  double min_dist = 1e300;
  for (uint32_t v = 0; v < 256; ++v) {
    Tensor ev = model.embed_tokens(tape, {static_cast<TokenId>(v)});
    double dist = 0.0;
    for (size_t j = 0; j < d; ++j) {
      double diff = ev.at(j) - ee.at(j);
      dist += diff * diff;
    }
    min_dist = std::min(min_dist, dist);
  }
  CHECK(min_dist > 0.0);
}

TEST_CASE("width mismatches are rejected") {
  CHECK_THROWS_AS(token_word(300, 8), Error);
  BitWord malformed;
  malformed.width = 8;
  malformed.bits = {1, 0};
  CHECK_THROWS_AS(decode_bits(malformed), Error);
}
