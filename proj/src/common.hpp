#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nee {

// Error taxonomy mirrored 1:1 by the C API status codes.
enum class ErrorKind {
  InvalidArgument,
  Io,
  Format,
  Numeric,
  Budget,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

const char* error_kind_name(ErrorKind kind);

// 64-bit FNV-1a. Used for config hashes, payload checksums and seed derivation.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ull);

// Deterministic RNG. All distributions are implemented by hand so that
// generated streams are pinned: identical seeds give identical bytes on any
// platform, independent of the standard library's <random> distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). Rejection-free modulo is fine here; bias at 64 bits is
  // negligible for every n this project uses, and the stream stays pinned.
  uint64_t below(uint64_t n);

  // Uniform in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller over our own uniforms.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Derives a child seed from a base seed and a label (parameter name, shard
// index, ...). Makes seeding independent of construction order.
uint64_t derive_seed(uint64_t base, const std::string& label);

}  // namespace nee
