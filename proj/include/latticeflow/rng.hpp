#pragma once

#include <cstdint>

namespace latticeflow {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stateless counter-based generator: absorbs words one at a time.  All
// per-edge uniforms are keyed by absolute edge coordinates through this, so
// samples depend on (seed, edge) only and never on evaluation order.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed) : h_(mix64(seed ^ 0x6c7f9e4b21d0a35bULL)) {}
  KeyedRng& absorb(std::uint64_t w) {
    h_ = mix64(h_ ^ w);
    return *this;
  }
  KeyedRng& absorb_i64(std::int64_t w) { return absorb(static_cast<std::uint64_t>(w)); }
  std::uint64_t digest() const { return mix64(h_ ^ 0x94d0d0c7a5397b1fULL); }

 private:
  std::uint64_t h_;
};

// Independent derived seed streams (replicates, i.i.d. copies in experiments).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return KeyedRng(base).absorb(stream).absorb(index).digest();
}

}  // namespace latticeflow
