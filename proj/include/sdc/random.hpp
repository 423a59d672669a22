#pragma once

#include <cstdint>
#include <random>

namespace sdc {

/// Per-run seed derived from (global seed, run id) through std::seed_seq, so
/// every run draws from its own stream regardless of scheduling order.
inline std::uint64_t run_seed(std::uint64_t global_seed, std::uint64_t run_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(global_seed), static_cast<std::uint32_t>(global_seed >> 32),
                      static_cast<std::uint32_t>(run_id), static_cast<std::uint32_t>(run_id >> 32)};
    std::mt19937_64 gen(seq);
    return gen();
}

using Rng = std::mt19937_64;

/// Uniform double in [lo, hi) from the top 53 bits; identical on every platform.
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sdc
