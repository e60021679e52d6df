#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace hpjks {

/// SplitMix64 finalizer. Used both as the stream generator and to derive
/// sub-stream keys, so any (seed, key path) pair names one stream.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and a path of integer keys.
/// Derivation is order-sensitive: derive(s, {a, b}) != derive(s, {b, a}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based random stream satisfying UniformRandomBitGenerator.
///
/// Each replication, firm, or bootstrap iteration gets its own stream
/// built from derive_seed(master, {...}); results therefore do not depend on
/// which thread consumed which stream.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) noexcept : state_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
      : Stream(derive_seed(seed, path)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform draw on the open interval (0, 1); never returns 0 or 1, so it is
  /// safe to feed into quantile functions.
  double open_uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace hpjks
