#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "common.hpp"

namespace nee {

// Token alphabet: numbers 0 .. 2^n - 1 plus the end token e. The start token
// s is identified with the number 0 and has no code of its own. e doubles as
// the sequence terminator and as infinity.
using TokenId = int32_t;
inline constexpr TokenId kEndToken = -1;

inline bool is_end(TokenId t) { return t == kEndToken; }

// An n-bit binary value or the end token. Bits are stored least-significant
// first: bit i carries weight 2^i.
struct BitWord {
  uint32_t width = 8;
  std::vector<uint8_t> bits;  // empty for the end token
  bool end = false;

  bool is_number() const { return !end; }
};

// value -> BitWord; value must lie in [0, 2^width).
BitWord encode_uint(uint64_t value, uint32_t width);
BitWord end_word(uint32_t width);
BitWord token_word(TokenId token, uint32_t width);

// BitWord -> value; the end token decodes to nullopt (the distinguished
// end/infinity marker).
std::optional<uint64_t> decode_bits(const BitWord& word);

// One-hot indicator over an alphabet of `alphabet_size` symbols.
std::vector<double> one_hot_encode(size_t value, size_t alphabet_size);

// Token code for one-hot paths: numbers map to themselves, e maps to 2^width.
size_t token_vocab_index(TokenId token, uint32_t width);
size_t vocab_size(uint32_t width);

}  // namespace nee
