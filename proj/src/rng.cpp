#include "hpjks/rng.hpp"

namespace hpjks {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed + 0x243f6a8885a308d3ULL);
  for (std::uint64_t key : path) {
    h = mix64(h ^ mix64(key + 0x13198a2e03707344ULL));
  }
  return h;
}

}  // namespace hpjks
