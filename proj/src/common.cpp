#include "common.hpp"

#include <cmath>

namespace nee {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s, uint64_t seed) {
  return fnv1a64(s.data(), s.size(), seed);
}

uint64_t Rng::below(uint64_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "Rng::below(0)");
  return next_u64() % n;
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  if (hi < lo) fail(ErrorKind::InvalidArgument, "Rng::uniform_int: hi < lo");
  return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  have_cached_normal_ = true;
  return r * std::cos(theta);
}

uint64_t derive_seed(uint64_t base, const std::string& label) {
  uint64_t h = fnv1a64(label);
  h = fnv1a64(&base, sizeof(base), h);
  // avoid the all-zero seed corner of mt19937_64
  return h == 0 ? 0x9e3779b97f4a7c15ull : h;
}

}  // namespace nee
