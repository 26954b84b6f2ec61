#pragma once

#include <cstdint>
#include <random>

namespace samix {

// Counter-based stream derivation: results stay identical no matter how work
// is partitioned across threads, as long as each unit derives its own stream.
inline std::mt19937_64 derive_rng(uint64_t seed, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(a),    static_cast<uint32_t>(a >> 32),
                    static_cast<uint32_t>(b),    static_cast<uint32_t>(b >> 32),
                    static_cast<uint32_t>(c),    static_cast<uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace samix
