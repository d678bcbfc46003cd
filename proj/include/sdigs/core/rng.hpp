#pragma once

#include <cstdint>

namespace sdigs {

// SplitMix64 finalizer: cheap, well-mixed 64-bit hash used to derive
// independent deterministic streams from (seed, ordinal) keys.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace sdigs
