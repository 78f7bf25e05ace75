// Exact arithmetic on 64-bit naturals: deterministic primality, factorization,
// Euler phi, Moebius mu, the restricted mu_3 (supported on squarefree products
// of primes = 3 mod 4), and sum-of-two-squares certificates.
//
// Everything here is an exact oracle: no probabilistic answers. Primality is
// deterministic Miller-Rabin with the 12-prime base set (complete far beyond
// 2^64); factorization is trial division by cached small primes with a
// deterministic Brent-rho fallback.
#pragma once

#include <algorithm>
#include <mutex>
#include <optional>
#include <vector>

#include "gt2/common.hpp"

namespace gt2 {

inline u64 mulmod_u64(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

inline u64 powmod_u64(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Deterministic for all n < 2^64: Miller-Rabin with the first 12 primes as
// bases (sufficient below 3.18e24).
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

struct PrimePower {
    u64 prime;
    u32 exponent;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// Exact factorization certificate. Invariants: primes strictly increasing,
// product of prime^exponent == n, n == 1 <=> factors empty.
struct Factorization {
    u64 n = 1;
    std::vector<PrimePower> factors;

    bool valid() const {
        u128 prod = 1;
        u64 prev = 0;
        for (const auto& pe : factors) {
            if (pe.prime <= prev || pe.exponent == 0 || !is_prime(pe.prime)) return false;
            prev = pe.prime;
            for (u32 i = 0; i < pe.exponent; ++i) prod *= pe.prime;
            if (prod > ~u64{0}) return false;
        }
        return static_cast<u64>(prod) == n;
    }
};

namespace detail {

// Cached primes up to 10^6 for the trial-division layer.
inline const std::vector<u32>& small_primes() {
    static const std::vector<u32> primes = [] {
        const u32 limit = 1'000'000;
        std::vector<bool> comp(limit + 1, false);
        std::vector<u32> ps;
        for (u32 i = 2; i <= limit; ++i) {
            if (!comp[i]) {
                ps.push_back(i);
                for (u64 j = static_cast<u64>(i) * i; j <= limit; j += i) comp[j] = true;
            }
        }
        return ps;
    }();
    return primes;
}

// Brent's cycle variant of Pollard rho with a deterministic parameter
// schedule c = 1, 2, 3, ...  Returns a nontrivial factor of composite n.
inline u64 brent_rho(u64 n) {
    if (n % 2 == 0) return 2;
    for (u64 c = 1;; ++c) {
        u64 x = 2, y = 2, d = 1;
        u64 power = 1, lam = 1;
        auto f = [&](u64 v) { return (mulmod_u64(v, v, n) + c) % n; };
        while (d == 1) {
            if (power == lam) {
                x = y;
                power <<= 1;
                lam = 0;
            }
            y = f(y);
            ++lam;
            u64 diff = x > y ? x - y : y - x;
            d = gcd_u64(diff, n);
        }
        if (d != n) return d;
    }
}

inline void factor_rec(u64 n, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = brent_rho(n);
    factor_rec(d, out);
    factor_rec(n / d, out);
}

}  // namespace detail

inline Factorization factorize(u64 n) {
    if (n == 0) throw ValidationError("factorize: n must be >= 1");
    Factorization f;
    f.n = n;
    u64 rem = n;
    for (u32 p : detail::small_primes()) {
        if (static_cast<u64>(p) * p > rem) break;
        if (rem % p == 0) {
            u32 e = 0;
            while (rem % p == 0) {
                rem /= p;
                ++e;
            }
            f.factors.push_back({p, e});
        }
    }
    if (rem > 1) {
        if (is_prime(rem)) {
            f.factors.push_back({rem, 1});
        } else {
            std::vector<u64> ps;
            detail::factor_rec(rem, ps);
            std::sort(ps.begin(), ps.end());
            for (size_t i = 0; i < ps.size();) {
                size_t j = i;
                while (j < ps.size() && ps[j] == ps[i]) ++j;
                f.factors.push_back({ps[i], static_cast<u32>(j - i)});
                i = j;
            }
            std::sort(f.factors.begin(), f.factors.end(),
                      [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
        }
    }
    return f;
}

inline u64 euler_phi(const Factorization& f) {
    u64 r = f.n;
    for (const auto& pe : f.factors) r = r / pe.prime * (pe.prime - 1);
    return r;
}

inline int mobius(const Factorization& f) {
    for (const auto& pe : f.factors)
        if (pe.exponent >= 2) return 0;
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

// mu_3: 1 at n = 1; (-1)^r on squarefree products of r distinct primes all
// congruent to 3 mod 4; 0 otherwise.
inline int mobius3(const Factorization& f) {
    for (const auto& pe : f.factors) {
        if (pe.exponent >= 2) return 0;
        if (pe.prime % 4 != 3) return 0;
    }
    return (f.factors.size() % 2 == 0) ? 1 : -1;
}

// Witness n = x^2 + y^2 with x <= y; primitive <=> gcd(x, y) == 1.
struct TwoSquaresCert {
    u64 n = 0;
    u64 x = 0;
    u64 y = 0;
    bool primitive = false;

    bool check() const {
        if (x > y) return false;
        u128 s = static_cast<u128>(x) * x + static_cast<u128>(y) * y;
        if (s != n) return false;
        return primitive == (gcd_u64(x, y) == 1);
    }
};

// Classical existence criteria, evaluated from a factorization.
//  - any representation: every prime = 3 mod 4 divides n to an even power;
//  - primitive representation: 4 does not divide n and no prime = 3 mod 4
//    divides n;
//  - with zero coordinates disallowed (naturals exclude 0), representations
//    with a zero coordinate exist only when n = 4^a * m^2 with m composed of
//    primes = 3 mod 4 (these n get excluded), and the only primitive zero
//    representation is n = 1.
inline bool sum_two_squares_admissible(const Factorization& f, bool zero_allowed) {
    bool has1 = false;
    u32 e2 = 0;
    for (const auto& pe : f.factors) {
        if (pe.prime == 2) {
            e2 = pe.exponent;
        } else if (pe.prime % 4 == 3) {
            if (pe.exponent % 2 != 0) return false;
        } else {
            has1 = true;
        }
    }
    if (zero_allowed) return true;
    // Only zero-coordinate representations exist iff no prime = 1 mod 4
    // divides n and the exponent of 2 is even.
    return has1 || (e2 % 2 == 1);
}

inline bool primitive_two_squares_admissible(const Factorization& f, bool zero_allowed) {
    if (f.n == 0) return false;
    if (f.n % 4 == 0) return false;
    for (const auto& pe : f.factors)
        if (pe.prime % 4 == 3) return false;
    if (!zero_allowed && f.n == 1) return false;  // 1 = 1^2 + 0^2 only
    return true;
}

// Search for the canonical certificate: minimal x with x <= y (restricted to
// primitive pairs when requested). Returns nullopt when none exists; the
// criterion and the search are required to agree (IdentityViolation if not).
inline std::optional<TwoSquaresCert> two_squares(u64 n, bool require_primitive,
                                                 bool zero_allowed = true) {
    std::optional<TwoSquaresCert> found;
    u64 x0 = zero_allowed ? 0 : 1;
    for (u64 x = x0; 2 * x * x <= n; ++x) {
        u64 rest = n - x * x;
        u64 y = isqrt_u64(rest);
        if (y * y != rest) continue;
        if (!zero_allowed && (x == 0 || y == 0)) continue;
        bool prim = gcd_u64(x, y) == 1;
        if (require_primitive && !prim) continue;
        found = TwoSquaresCert{n, x, y, prim};
        break;
    }
    if (n > 0) {
        const Factorization f = factorize(n);
        bool expect = require_primitive ? primitive_two_squares_admissible(f, zero_allowed)
                                        : sum_two_squares_admissible(f, zero_allowed);
        if (expect != found.has_value())
            throw IdentityViolation("two_squares: criterion and search disagree at n=" +
                                    std::to_string(n));
    }
    return found;
}

}  // namespace gt2
