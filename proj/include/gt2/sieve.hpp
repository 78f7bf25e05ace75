// Segmented sieving for P2 = {p prime : p - 1 = x^2 + y^2} and the scaled
// families R_q = {p : p = q^2(x^2+y^2) + 1, gcd(x,y) = 1}, plus the W-trick
// parameter selection (S_W, q0, b).
//
// Membership is decided by the factorization criterion on p - 1 (every prime
// = 3 mod 4 must divide to an even power; primitive additionally requires
// 4 ated p-1 and no prime = 3 mod 4 at all), evaluated by a segmented
// factor-removal sieve: every prime q <= sqrt(hi) is divided out of each
// multiple while tracking exponent parity, so a segment of 10^8 integers
// costs ~2.5e8 divisions. The enumeration-by-representation route survives
// only as a small-range test oracle.
//
// Convention: whether 0 is a natural number is a run-time flag
// (naturals-include-zero, default true). With zero excluded, integers of the
// form 4^a * m^2 (m a product of primes = 3 mod 4) lose their only
// representations, and n = 1 loses its only primitive one.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gt2/arith.hpp"
#include "gt2/parallel.hpp"

namespace gt2 {

inline constexpr u64 kSieveBudget = 1'000'000'000ull;  // desk-scale cap
inline constexpr u64 kDefaultSegment = 1u << 21;

// Plain segmented Eratosthenes. Returns all primes <= x_max.
inline std::vector<u64> sieve_primes(u64 x_max, u64 segment = kDefaultSegment) {
    if (x_max > kSieveBudget)
        throw ResourceError("sieve_primes: x_max exceeds the 1e9 desk-scale budget");
    std::vector<u64> primes;
    if (x_max < 2) return primes;
    const u64 root = isqrt_u64(x_max);
    std::vector<u64> base;
    {
        std::vector<bool> comp(root + 1, false);
        for (u64 i = 2; i <= root; ++i) {
            if (!comp[i]) {
                base.push_back(i);
                for (u64 j = i * i; j <= root; j += i) comp[j] = true;
            }
        }
    }
    primes.reserve(static_cast<size_t>(1.2 * x_max / std::max(1.0, std::log(double(x_max)))));
    std::vector<u8> flags;
    for (u64 lo = 2; lo <= x_max; lo += segment) {
        const u64 hi = std::min(x_max + 1, lo + segment);
        flags.assign(static_cast<size_t>(hi - lo), 1);
        for (u64 p : base) {
            if (p * p >= hi) break;
            u64 start = std::max(p * p, ((lo + p - 1) / p) * p);
            for (u64 j = start; j < hi; j += p) flags[static_cast<size_t>(j - lo)] = 0;
        }
        for (u64 n = lo; n < hi; ++n)
            if (flags[static_cast<size_t>(n - lo)]) primes.push_back(n);
    }
    return primes;
}

// Per-integer two-squares structure flags over a segment.
struct AdmissibilityFlags {
    // ok3:    every prime = 3 mod 4 divides to an even power
    // has3:   some prime = 3 mod 4 divides at all
    // has1:   some prime = 1 mod 4 divides
    // e2odd:  exponent of 2 is odd
    std::vector<u8> bits;  // bit0 ok3, bit1 has3, bit2 has1, bit3 e2odd
    u64 lo = 0;

    bool ok3(u64 n) const { return bits[size_t(n - lo)] & 1; }
    bool has3(u64 n) const { return bits[size_t(n - lo)] & 2; }
    bool has1(u64 n) const { return bits[size_t(n - lo)] & 4; }
    bool e2odd(u64 n) const { return bits[size_t(n - lo)] & 8; }

    // n = x^2 + y^2 with x, y in N (per convention)
    bool representable(u64 n, bool zero_allowed) const {
        if (!ok3(n)) return false;
        return zero_allowed || has1(n) || e2odd(n);
    }
    // n = x^2 + y^2, gcd(x, y) = 1
    bool primitive(u64 n, bool zero_allowed) const {
        if (n % 4 == 0 || has3(n)) return false;
        if (!zero_allowed && n == 1) return false;
        return true;
    }
};

// Factor-removal sieve on [lo, hi). base_primes must contain all primes
// <= sqrt(hi - 1).
inline AdmissibilityFlags admissibility_sieve(u64 lo, u64 hi, const std::vector<u64>& base_primes) {
    AdmissibilityFlags out;
    out.lo = lo;
    const size_t len = static_cast<size_t>(hi - lo);
    out.bits.assign(len, 1);  // ok3 set, others clear
    if (len == 0) return out;
    std::vector<u64> rem(len);
    for (size_t i = 0; i < len; ++i) {
        u64 n = lo + i;
        if (n == 0) {
            rem[i] = 0;
            out.bits[i] = 0;
            continue;
        }
        int tz = std::countr_zero(n);
        rem[i] = n >> tz;
        if (tz & 1) out.bits[i] |= 8;
    }
    for (u64 q : base_primes) {
        if (q == 2) continue;
        if (q * q >= hi) break;
        const u8 mark = (q % 4 == 3) ? u8(2) : u8(4);
        u64 start = ((lo + q - 1) / q) * q;
        if (start < q * 2) start = q * 2;  // n == q handled by leftover logic
        for (u64 n = start; n < hi; n += q) {
            size_t i = static_cast<size_t>(n - lo);
            u64 r = rem[i];
            if (r % q != 0) continue;  // power of 2 already removed cases
            u32 e = 0;
            do {
                r /= q;
                ++e;
            } while (r % q == 0);
            rem[i] = r;
            out.bits[i] |= mark;
            if ((q % 4 == 3) && (e & 1)) out.bits[i] &= ~u8(1);
        }
    }
    for (size_t i = 0; i < len; ++i) {
        u64 r = rem[i];
        if (r > 1) {
            if (r % 4 == 3) {
                out.bits[i] &= ~u8(1);
                out.bits[i] |= 2;
            } else if (r % 4 == 1) {
                out.bits[i] |= 4;
            }
            // r == 2 cannot occur (powers of two were stripped)
        }
    }
    return out;
}

// The set P2 up to x_max.
struct P2Table {
    u64 x_max = 0;
    bool zero_allowed = true;
    std::vector<u64> members;

    bool contains(u64 p) const {
        return std::binary_search(members.begin(), members.end(), p);
    }
};

namespace detail {

struct SegmentScan {
    u64 lo, hi;                 // n-range scanned
    AdmissibilityFlags adm;     // flags for [lo, hi)
    std::vector<u8> prime_bit;  // primality for [lo, hi)
};

inline SegmentScan scan_segment(u64 lo, u64 hi, const std::vector<u64>& base_primes) {
    SegmentScan s;
    s.lo = lo;
    s.hi = hi;
    s.adm = admissibility_sieve(lo, hi, base_primes);
    const size_t len = static_cast<size_t>(hi - lo);
    s.prime_bit.assign(len, 1);
    for (u64 i = lo; i < std::min<u64>(hi, 2); ++i) s.prime_bit[size_t(i - lo)] = 0;
    for (u64 p : base_primes) {
        if (p * p >= hi) break;
        u64 start = std::max(p * p, ((lo + p - 1) / p) * p);
        for (u64 j = start; j < hi; j += p) s.prime_bit[static_cast<size_t>(j - lo)] = 0;
    }
    return s;
}

}  // namespace detail

// Walk [2, x_max] in parallel segments; for every prime p with p-1 satisfying
// the representation criterion, call back in ascending order.
inline void for_each_p2(u64 x_max, bool zero_allowed, const std::function<void(u64)>& emit,
                        u64 segment = kDefaultSegment) {
    if (x_max > kSieveBudget)
        throw ResourceError("sieve_p2: x_max exceeds the 1e9 desk-scale budget");
    if (x_max < 2) return;
    const u64 root = isqrt_u64(x_max);
    std::vector<u64> base = sieve_primes(std::max<u64>(root, 3));
    // Segments scan [lo-1, hi) so that p-1 flags are local.
    const u64 total = x_max - 1;  // candidates 2..x_max
    const size_t nseg = static_cast<size_t>((total + segment - 1) / segment);
    std::vector<std::vector<u64>> found(nseg);
    parallel_chunks(total, segment, [&](const ChunkRange& cr) {
        const u64 plo = 2 + cr.begin, phi = 2 + cr.end;  // candidate primes [plo, phi)
        auto seg = detail::scan_segment(plo - 1, phi, base);
        auto& out = found[cr.index];
        for (u64 p = plo; p < phi; ++p) {
            if (!seg.prime_bit[static_cast<size_t>(p - seg.lo)]) continue;
            if (seg.adm.representable(p - 1, zero_allowed)) out.push_back(p);
        }
    });
    for (const auto& v : found)
        for (u64 p : v) emit(p);
}

inline P2Table sieve_p2(u64 x_max, bool zero_allowed = true, u64 segment = kDefaultSegment) {
    P2Table t;
    t.x_max = x_max;
    t.zero_allowed = zero_allowed;
    for_each_p2(x_max, zero_allowed, [&](u64 p) { t.members.push_back(p); }, segment);
    return t;
}

// R_q membership: p prime, q^2 | p-1, and (p-1)/q^2 primitively representable.
// Returns the primitive certificate of (p-1)/q^2 when p is a member.
inline std::optional<TwoSquaresCert> membership_rq(u64 p, u64 q, bool zero_allowed = true) {
    if (!is_prime(p)) return std::nullopt;
    if (q == 0) throw ValidationError("membership_rq: q must be >= 1");
    u64 q2 = q * q;
    if ((p - 1) % q2 != 0) return std::nullopt;
    return two_squares((p - 1) / q2, /*require_primitive=*/true, zero_allowed);
}

// Fast criterion-only version (no certificate search).
inline bool in_rq(u64 p, u64 q, bool zero_allowed = true) {
    if (q == 0 || !is_prime(p)) return false;
    u64 q2 = q * q;
    if ((p - 1) % q2 != 0) return false;
    u64 n = (p - 1) / q2;
    if (n == 0) return false;
    return primitive_two_squares_admissible(factorize(n), zero_allowed);
}

enum class WindowKind { UnitToX, Dyadic };  // [1, X] vs [X, 2X]

struct DensityCheckpoint {
    u64 x = 0;
    u64 count = 0;
    double fitted_c = 0.0;  // count * (log X)^{3/2} / X
};

struct DensityReport {
    u64 q = 0;  // 0 = the whole family P2
    WindowKind window = WindowKind::UnitToX;
    std::vector<DensityCheckpoint> checkpoints;
};

// Counts |R_q ∩ window| (q >= 1) or |P2 ∩ window| (q == 0) at each checkpoint.
inline DensityReport density_report(u64 q, std::vector<u64> checkpoints, WindowKind window,
                                    bool zero_allowed = true, u64 segment = kDefaultSegment) {
    DensityReport rep;
    rep.q = q;
    rep.window = window;
    if (checkpoints.empty()) return rep;
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw ValidationError("density_report: checkpoints must be sorted ascending");
    const u64 xmax = checkpoints.back();
    const u64 top = window == WindowKind::Dyadic ? 2 * xmax : xmax;
    if (top > kSieveBudget) throw ResourceError("density_report: checkpoint exceeds sieve budget");

    std::vector<u64> members;
    if (q == 0) {
        for_each_p2(top, zero_allowed, [&](u64 p) { members.push_back(p); }, segment);
    } else {
        // Primes p = 1 mod q^2 with (p-1)/q^2 primitively representable.
        const u64 q2 = q * q;
        const u64 root = isqrt_u64(top);
        std::vector<u64> base = sieve_primes(std::max<u64>(root, 3));
        const u64 total = top - 1;
        const size_t nseg = static_cast<size_t>((total + segment - 1) / segment);
        std::vector<std::vector<u64>> found(nseg);
        parallel_chunks(total, segment, [&](const ChunkRange& cr) {
            const u64 plo = 2 + cr.begin, phi = 2 + cr.end;
            auto seg = detail::scan_segment(plo - 1, phi, base);
            auto& out = found[cr.index];
            for (u64 p = plo; p < phi; ++p) {
                if (!seg.prime_bit[static_cast<size_t>(p - seg.lo)]) continue;
                if ((p - 1) % q2 != 0) continue;
                const u64 n = (p - 1) / q2;
                bool prim;
                if (q == 1) {
                    prim = n >= 1 && seg.adm.primitive(n, zero_allowed);
                } else {
                    prim = n >= 1 && primitive_two_squares_admissible(factorize(n), zero_allowed);
                }
                if (prim) out.push_back(p);
            }
        });
        for (auto& v : found) members.insert(members.end(), v.begin(), v.end());
    }

    for (u64 x : checkpoints) {
        const u64 wlo = window == WindowKind::Dyadic ? x : 1;
        const u64 whi = window == WindowKind::Dyadic ? 2 * x : x;
        auto lo_it = std::lower_bound(members.begin(), members.end(), wlo);
        auto hi_it = std::upper_bound(members.begin(), members.end(), whi);
        DensityCheckpoint cp;
        cp.x = x;
        cp.count = static_cast<u64>(hi_it - lo_it);
        cp.fitted_c = double(cp.count) * std::pow(std::log(double(x)), 1.5) / double(x);
        rep.checkpoints.push_back(cp);
    }
    return rep;
}

// S_W = { 1 <= b <= W : gcd(q0^2 b + 1, W) = 1, gcd(b, W) has no prime
// factor = 3 mod 4 }, by exhaustive scan.
struct SWSet {
    u64 W = 1;
    u64 q0 = 1;
    std::vector<u64> members;

    u64 cardinality() const { return members.size(); }
};

inline SWSet compute_sw(u64 W, u64 q0) {
    if (W == 0 || q0 == 0) throw ValidationError("compute_sw: W and q0 must be >= 1");
    if (W > 100'000'000ull) throw ResourceError("compute_sw: W too large for exhaustive scan");
    {
        Factorization f = factorize(W);
        for (const auto& pe : f.factors)
            if (pe.exponent > 1) throw ValidationError("compute_sw: W must be squarefree");
    }
    SWSet s;
    s.W = W;
    s.q0 = q0;
    const u64 q0sq_mod = (q0 % W) * (q0 % W) % W;
    for (u64 b = 1; b <= W; ++b) {
        u64 t = (q0sq_mod * (b % W) + 1) % W;
        if (gcd_u64(t, W) != 1) continue;
        u64 g = gcd_u64(b, W);
        while (g % 2 == 0) g /= 2;
        bool ok = true;
        for (u64 d = 3; d * d <= g; d += 2) {
            if (g % d == 0) {
                while (g % d == 0) g /= d;
                if (d % 4 == 3) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok && g > 1 && g % 4 == 3) ok = false;
        if (ok) s.members.push_back(b);
    }
    return s;
}

// |S_W| by the Chinese-remainder product formula. (The product is often
// displayed as if it were the set itself; here it is its cardinality.)
inline double sw_cardinality_formula(u64 W, u64 q0) {
    Factorization f = factorize(W);
    double r = double(W);
    for (const auto& pe : f.factors) {
        const u64 p = pe.prime;
        const bool divides_q0 = (q0 % p == 0);
        if (p % 4 == 3) {
            r *= divides_q0 ? (1.0 - 1.0 / double(p)) : (1.0 - 2.0 / double(p));
        } else if (!divides_q0) {
            r *= (1.0 - 1.0 / double(p));
        }
    }
    return r;
}

// Partial sum of eta_0 = sum_q 1/phi(q^2); phi(q^2) = q phi(q).
inline double eta0_partial(u64 Q) {
    if (Q == 0) throw ValidationError("eta0_partial: Q must be >= 1");
    std::vector<u64> phi(Q + 1);
    for (u64 i = 0; i <= Q; ++i) phi[i] = i;
    for (u64 i = 2; i <= Q; ++i) {
        if (phi[i] == i) {  // i prime
            for (u64 j = i; j <= Q; j += i) phi[j] -= phi[j] / i;
        }
    }
    double s = 0.0;
    for (u64 q = 1; q <= Q; ++q) s += 1.0 / (double(q) * double(phi[q]));
    return s;
}

inline u64 primorial(u64 w) {
    u64 W = 1;
    for (u64 p = 2; p <= w; ++p) {
        if (is_prime(p)) {
            if (W > ~u64{0} / p) throw ResourceError("primorial: W overflows 64 bits");
            W *= p;
        }
    }
    return W;
}

// Result of the two-stage pigeonhole selection of section-2 shape.
struct WTrickParams {
    u64 w = 1;
    u64 W = 1;
    u64 Q0 = 1;
    u64 q0 = 1;
    u64 b = 1;
    u64 score = 0;           // members of the winning residue class
    u64 window_total = 0;    // |A ∩ [X, 2X]|
    u64 window_covered = 0;  // |A ∩ (∪_{q<=Q0} R_q) ∩ [X, 2X]|
    u64 sw_size = 1;
    bool pigeonhole_covered_ok = false;  // score * Q0 * |S_W| >= window_covered
    bool pigeonhole_literal_ok = false;  // score * Q0 * |S_W| >= window_total
};

// members: ascending subset A of P2 (or a full P2Table's members). Window is
// [X, 2X]. Chooses q0 in [1, Q0] maximizing |R_q0 ∩ A ∩ window| (ties to the
// smallest q0), then b in S_W maximizing the class count
// (p-1)/q0^2 = b (mod W); ties to the smallest b.
inline WTrickParams select_wtrick(const std::vector<u64>& members, u64 X, u64 w, u64 Q0,
                                  bool zero_allowed = true) {
    if (Q0 == 0) throw ValidationError("select_wtrick: Q0 must be >= 1");
    auto lo = std::lower_bound(members.begin(), members.end(), X);
    auto hi = std::upper_bound(members.begin(), members.end(), 2 * X);
    if (lo == hi) throw ValidationError("select_wtrick: A has no members in [X, 2X]");

    WTrickParams out;
    out.w = w;
    out.W = primorial(w);
    out.Q0 = Q0;
    out.window_total = static_cast<u64>(hi - lo);

    // Count |R_q ∩ A ∩ window| for every q <= Q0 from one factorization of
    // p-1 per member: (p-1)/q^2 is primitively representable iff no prime
    // = 3 mod 4 survives in the quotient, its 2-exponent is <= 1, and (with
    // zero excluded) the quotient is not 1.
    // Assumes q^2 | f.n; decides whether (p-1)/q^2 has a primitive
    // representation.
    auto rq_member = [zero_allowed](const Factorization& f, u64 q) {
        u64 qq = q;
        for (const auto& pe : f.factors) {
            u32 vq = 0;
            while (qq % pe.prime == 0) {
                qq /= pe.prime;
                ++vq;
            }
            const u32 e = pe.exponent - 2 * vq;  // exponent in (p-1)/q^2
            if (e > 0) {
                if (pe.prime % 4 == 3) return false;
                if (pe.prime == 2 && e >= 2) return false;
            }
        }
        if (!zero_allowed && f.n == q * q) return false;  // quotient 1
        return true;
    };
    std::vector<u64> count_q(Q0 + 1, 0);
    u64 covered = 0;
    for (auto it = lo; it != hi; ++it) {
        const u64 p = *it;
        const Factorization f = factorize(p - 1);
        bool any = false;
        for (u64 q = 1; q <= Q0; ++q) {
            if ((p - 1) % (q * q) != 0) continue;
            if (rq_member(f, q)) {
                ++count_q[q];
                any = true;
            }
        }
        if (any) ++covered;
    }
    out.window_covered = covered;
    u64 best_q = 1;
    for (u64 q = 1; q <= Q0; ++q)
        if (count_q[q] > count_q[best_q]) best_q = q;
    out.q0 = best_q;

    const SWSet sw = compute_sw(out.W, out.q0);
    out.sw_size = sw.cardinality();
    std::vector<u64> count_b(sw.members.size(), 0);
    const u64 q2 = out.q0 * out.q0;
    for (auto it = lo; it != hi; ++it) {
        const u64 p = *it;
        if ((p - 1) % q2 != 0) continue;
        if (!primitive_two_squares_admissible(factorize((p - 1) / q2), zero_allowed)) continue;
        u64 bp = ((p - 1) / q2) % out.W;
        if (bp == 0) bp = out.W;
        auto bit = std::lower_bound(sw.members.begin(), sw.members.end(), bp);
        if (bit == sw.members.end() || *bit != bp)
            throw IdentityViolation("select_wtrick: R_q0 member lands outside S_W (p=" +
                                    std::to_string(p) + ")");
        ++count_b[static_cast<size_t>(bit - sw.members.begin())];
    }
    size_t best_b = 0;
    for (size_t i = 0; i < count_b.size(); ++i)
        if (count_b[i] > count_b[best_b]) best_b = i;
    out.b = sw.members.empty() ? 1 : sw.members[best_b];
    out.score = count_b.empty() ? 0 : count_b[best_b];

    // Self-audited averaging bound (see docs: the literal |A∩window| bound is
    // not a theorem at finite scale; the covered-count bound is).
    out.pigeonhole_covered_ok = out.score * out.Q0 * out.sw_size >= out.window_covered;
    out.pigeonhole_literal_ok = out.score * out.Q0 * out.sw_size >= out.window_total;
    if (!out.pigeonhole_covered_ok)
        throw IdentityViolation("select_wtrick: averaging pigeonhole bound failed");
    return out;
}

}  // namespace gt2
