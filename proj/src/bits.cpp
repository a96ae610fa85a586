#include "bits.hpp"

namespace nee {

BitWord encode_uint(uint64_t value, uint32_t width) {
  if (width == 0 || width > 32) {
    fail(ErrorKind::InvalidArgument, "encode_uint: unsupported width");
  }
  if (value >= (1ull << width)) {
    fail(ErrorKind::InvalidArgument,
         "encode_uint: value " + std::to_string(value) + " does not fit in " +
             std::to_string(width) + " bits");
  }
  BitWord w;
  w.width = width;
  w.end = false;
  w.bits.resize(width);
  for (uint32_t i = 0; i < width; ++i) {
    w.bits[i] = static_cast<uint8_t>((value >> i) & 1u);
  }
  return w;
}

BitWord end_word(uint32_t width) {
  BitWord w;
  w.width = width;
  w.end = true;
  return w;
}

BitWord token_word(TokenId token, uint32_t width) {
  if (is_end(token)) return end_word(width);
  if (token < 0) fail(ErrorKind::InvalidArgument, "token_word: negative token");
  return encode_uint(static_cast<uint64_t>(token), width);
}

std::optional<uint64_t> decode_bits(const BitWord& word) {
  if (word.end) return std::nullopt;
  if (word.bits.size() != word.width) {
    fail(ErrorKind::InvalidArgument, "decode_bits: malformed word");
  }
  uint64_t v = 0;
  for (uint32_t i = 0; i < word.width; ++i) {
    if (word.bits[i] > 1) {
      fail(ErrorKind::InvalidArgument, "decode_bits: non-binary digit");
    }
    v |= static_cast<uint64_t>(word.bits[i]) << i;
  }
  return v;
}

std::vector<double> one_hot_encode(size_t value, size_t alphabet_size) {
  if (value >= alphabet_size) {
    fail(ErrorKind::InvalidArgument, "one_hot_encode: value out of range");
  }
  std::vector<double> v(alphabet_size, 0.0);
  v[value] = 1.0;
  return v;
}

size_t token_vocab_index(TokenId token, uint32_t width) {
  if (is_end(token)) return static_cast<size_t>(1) << width;
  if (token < 0 || static_cast<uint64_t>(token) >= (1ull << width)) {
    fail(ErrorKind::InvalidArgument, "token_vocab_index: token out of range");
  }
  return static_cast<size_t>(token);
}

size_t vocab_size(uint32_t width) { return (static_cast<size_t>(1) << width) + 1; }

}  // namespace nee
