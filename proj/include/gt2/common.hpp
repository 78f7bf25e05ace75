// Shared basic types and the error taxonomy used across the toolkit.
//
// Error classes map onto the CLI exit-status contract:
//   ValidationError    -> exit 2  (bad parameters / malformed input)
//   ResourceError      -> exit 3  (budget exceeded, unwritable path, ...)
//   IdentityViolation  -> exit 4  (an exact algebraic identity failed; a bug,
//                                  never a math failure)
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gt2 {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

class IdentityViolation : public std::runtime_error {
public:
    explicit IdentityViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// gcd on u64 (std::gcd needs matching signedness anyway; keep one spelling).
inline u64 gcd_u64(u64 a, u64 b) {
    while (b != 0) {
        u64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// floor(sqrt(n)) exactly for 64-bit n.
inline u64 isqrt_u64(u64 n) {
    if (n == 0) return 0;
    u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n && (r + 1) != 0) ++r;
    return r;
}

}  // namespace gt2
