// Counter-based random streams for reproducible Monte Carlo: the k-th draw of
// stream s under seed q is a pure function mix(q, s, k). No state, so chunked
// parallel samplers get identical numbers regardless of thread count or
// evaluation order.
#pragma once

#include "gt2/common.hpp"

namespace gt2 {

namespace detail {
inline u64 splitmix64(u64 z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

// 64 uniform bits for (seed, stream, counter).
inline u64 counter_rng(u64 seed, u64 stream, u64 counter) {
    u64 z = detail::splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
    z = detail::splitmix64(z ^ (0xC2B2AE3D27D4EB4Full * (counter + 1)));
    return detail::splitmix64(z);
}

// Uniform value in [0, n) via the 128-bit multiply reduction (deterministic;
// bias below n / 2^64, irrelevant at the n ~ 1e9 scales used here).
inline u64 counter_uniform(u64 seed, u64 stream, u64 counter, u64 n) {
    u64 bits = counter_rng(seed, stream, counter);
    return static_cast<u64>((static_cast<u128>(bits) * n) >> 64);
}

}  // namespace gt2
