// Local factors of the singular series:
//
//   lambda*_I(p) = p * E( prod_{j in I} 1_{p | theta_j(x)} | x in Z_p^h ),
//
// computed exactly either by exhaustive scan of Z_p^h (the trusted oracle,
// used whenever p^h fits the scan budget) or by Gaussian elimination mod p of
// the affine system {theta_j = 0 mod p : j in I} (count = p^{h - rank} when
// consistent, 0 otherwise).
//
// lambda_I(p) is the W-aware classification:
//     1                      if I is empty,
//     0                      if p | W, p = 3 mod 4,
//     0                      if p | W, p != 3 mod 4, I meets {1..m},
//     exact lambda*_I(p)     otherwise.
//
// g(d_1..d_2m, e_1..e_2m) = prod_{p | D} lambda_{I_d(p) u I_e(p)}(p).
#pragma once

#include <algorithm>
#include <bit>
#include <optional>
#include <vector>

#include "gt2/arith.hpp"
#include "gt2/linforms.hpp"

namespace gt2 {

struct LocalFactor {
    u64 num = 0;
    u64 den = 1;

    double value() const { return double(num) / double(den); }
    void reduce() {
        const u64 g = gcd_u64(num == 0 ? den : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }
    friend bool operator==(const LocalFactor& a, const LocalFactor& b) {
        return a.num == b.num && a.den == b.den;
    }
};

struct SolutionCount {
    u64 count = 0;     // solutions in Z_p^h
    size_t rank = 0;   // rank of the coefficient matrix (rank method only)
    bool consistent = false;
};

namespace detail {

inline u64 mod_p(i64 c, u64 p) {
    i64 r = c % i64(p);
    return r < 0 ? u64(r + i64(p)) : u64(r);
}

inline u64 pow_u64(u64 b, u64 e) {
    u64 r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace detail

inline constexpr u64 kExhaustiveBudget = 20'000'000ull;

// Exhaustive scan of Z_p^h. Throws ResourceError when p^h exceeds the budget.
inline SolutionCount solution_count_exhaustive(u64 p, const std::vector<size_t>& subset,
                                               const ThetaSystem& theta) {
    const size_t h = theta.h();
    u128 dom = 1;
    for (size_t i = 0; i < h; ++i) {
        dom *= p;
        if (dom > kExhaustiveBudget) throw ResourceError("exhaustive local factor: p^h too large");
    }
    // reduced rows
    std::vector<std::vector<u64>> rows;
    std::vector<u64> cons;
    for (size_t j : subset) {
        std::vector<u64> r(h);
        for (size_t c = 0; c < h; ++c) r[c] = detail::mod_p(theta.theta[j].coeffs[c], p);
        rows.push_back(std::move(r));
        cons.push_back(detail::mod_p(theta.theta[j].constant, p));
    }
    SolutionCount out;
    std::vector<u64> x(h, 0);
    const u64 total = static_cast<u64>(dom);
    for (u64 it = 0; it < total; ++it) {
        bool all = true;
        for (size_t k = 0; k < rows.size() && all; ++k) {
            u64 acc = cons[k];
            for (size_t c = 0; c < h; ++c) acc += rows[k][c] * x[c];
            all = (acc % p == 0);
        }
        if (all) ++out.count;
        // odometer
        for (size_t c = 0; c < h; ++c) {
            if (++x[c] < p) break;
            x[c] = 0;
        }
    }
    out.consistent = out.count > 0;
    return out;
}

// Gaussian elimination mod p of the augmented system.
inline SolutionCount solution_count_rank(u64 p, const std::vector<size_t>& subset,
                                         const ThetaSystem& theta) {
    const size_t h = theta.h();
    const size_t m = subset.size();
    std::vector<std::vector<u64>> a(m, std::vector<u64>(h + 1));
    for (size_t k = 0; k < m; ++k) {
        const auto& f = theta.theta[subset[k]];
        for (size_t c = 0; c < h; ++c) a[k][c] = detail::mod_p(f.coeffs[c], p);
        // theta_j(x) = 0  <=>  sum c_j x_j = -constant
        a[k][h] = (p - detail::mod_p(f.constant, p)) % p;
    }
    size_t rank = 0;
    for (size_t col = 0; col < h && rank < m; ++col) {
        size_t piv = rank;
        while (piv < m && a[piv][col] == 0) ++piv;
        if (piv == m) continue;
        std::swap(a[piv], a[rank]);
        const u64 inv = powmod_u64(a[rank][col], p - 2, p);
        for (size_t r = 0; r < m; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            const u64 factor = mulmod_u64(a[r][col], inv, p);
            for (size_t c = col; c <= h; ++c) {
                const u64 sub = mulmod_u64(factor, a[rank][c], p);
                a[r][c] = (a[r][c] + p - sub) % p;
            }
        }
        ++rank;
    }
    SolutionCount out;
    out.rank = rank;
    out.consistent = true;
    for (size_t r = 0; r < m; ++r) {
        bool zero_row = true;
        for (size_t c = 0; c < h; ++c) zero_row &= (a[r][c] == 0);
        if (zero_row && a[r][h] != 0) out.consistent = false;
    }
    if (out.consistent) out.count = detail::pow_u64(p, h - rank);
    return out;
}

// lambda*_I(p) as an exact rational. Empty I gives 1. Method selection:
// exhaustive for p <= 97 when p^h fits the budget, rank elimination
// otherwise.
inline LocalFactor local_factor(u64 p, const std::vector<size_t>& subset,
                                const ThetaSystem& theta) {
    if (!is_prime(p)) throw ValidationError("local_factor: p must be prime");
    if (subset.empty()) return LocalFactor{1, 1};
    u128 dom = 1;
    bool small = true;
    for (size_t i = 0; i < theta.h(); ++i) {
        dom *= p;
        if (dom > kExhaustiveBudget) small = false;
    }
    const SolutionCount sc = (p <= 97 && small) ? solution_count_exhaustive(p, subset, theta)
                                                : solution_count_rank(p, subset, theta);
    // lambda* = p * count / p^h = count / p^{h-1}
    LocalFactor lf;
    lf.num = sc.count;
    lf.den = detail::pow_u64(p, theta.h() - 1);
    lf.reduce();
    return lf;
}

// The W-aware case table. "p != 3 mod 4" branch applies to p = 2 as well.
inline LocalFactor local_factor_classified(u64 p, const std::vector<size_t>& subset,
                                           const ThetaSystem& theta) {
    if (subset.empty()) return LocalFactor{1, 1};
    if (theta.W % p == 0) {
        if (p % 4 == 3) return LocalFactor{0, 1};
        bool meets_mu_slots = false;
        for (size_t j : subset) meets_mu_slots |= (j < theta.m);
        if (meets_mu_slots) return LocalFactor{0, 1};
    }
    return local_factor(p, subset, theta);
}

// g(d, e) = prod_{p | D} lambda_{I_d(p) u I_e(p)}(p); inputs squarefree <= R.
inline double singular_series_g(const std::vector<u64>& d, const std::vector<u64>& e,
                                const ThetaSystem& theta) {
    if (d.size() != theta.theta.size() || e.size() != theta.theta.size())
        throw ValidationError("singular_series_g: need one d_j and e_j per theta row");
    u64 D = 1;
    std::vector<u64> all;
    for (u64 v : d) all.push_back(v);
    for (u64 v : e) all.push_back(v);
    for (u64 v : all) {
        if (v == 0) throw ValidationError("singular_series_g: divisors must be >= 1");
        const Factorization f = factorize(v);
        for (const auto& pe : f.factors)
            if (pe.exponent > 1) throw ValidationError("singular_series_g: inputs must be squarefree");
        const u64 g = gcd_u64(D, v);
        if (v / g > ~u64{0} / D) throw ResourceError("singular_series_g: lcm overflows 64 bits");
        D = D / g * v;
    }
    if (D == 1) return 1.0;
    double out = 1.0;
    for (const auto& pe : factorize(D).factors) {
        const u64 p = pe.prime;
        std::vector<size_t> subset;
        for (size_t j = 0; j < d.size(); ++j)
            if (d[j] % p == 0 || e[j] % p == 0) subset.push_back(j);
        out *= local_factor_classified(p, subset, theta).value();
        if (out == 0.0) break;
    }
    return out;
}

struct EtaKappa {
    i64 eta1 = 0;  // sum over pairs of subsets of {1..2m}
    i64 eta2 = 0;  // same over {1..m}
    double kappa1 = 0.0;  // defined for the class p = 3 mod 4
    double kappa2 = 0.0;  // defined for the complement class
};

// Exhaustive subset-pair sums. eta uses the constant table lambda_I =
// 1_{|I| = 1}; kappa uses the classified local factors of the attached
// system at p (lambda values memoized per union mask).
inline EtaKappa eta_kappa(size_t m, std::optional<u64> p, const ThetaSystem& theta) {
    if (m > 6) throw ValidationError("eta_kappa: m must be <= 6");
    EtaKappa out;
    const u32 full1 = 1u << (2 * m);
    const u32 full2 = 1u << m;
    for (u32 I = 0; I < full1; ++I)
        for (u32 J = 0; J < full1; ++J) {
            if ((I | J) == 0) continue;
            const int sgn = ((std::popcount(I) + std::popcount(J)) % 2 == 0) ? 1 : -1;
            out.eta1 += sgn * (std::popcount(I | J) == 1 ? 1 : 0);
        }
    for (u32 I = 0; I < full2; ++I)
        for (u32 J = 0; J < full2; ++J) {
            if ((I | J) == 0) continue;
            const int sgn = ((std::popcount(I) + std::popcount(J)) % 2 == 0) ? 1 : -1;
            out.eta2 += sgn * (std::popcount(I | J) == 1 ? 1 : 0);
        }
    if (p) {
        if (theta.theta.size() != 2 * m)
            throw ValidationError("eta_kappa: theta system must have 2m rows");
        std::vector<double> memo(full1, -1.0);
        auto lam = [&](u32 U) {
            if (memo[U] < 0.0) {
                std::vector<size_t> subset;
                for (size_t j = 0; j < 2 * m; ++j)
                    if (U & (1u << j)) subset.push_back(j);
                memo[U] = local_factor_classified(*p, subset, theta).value();
            }
            return memo[U];
        };
        for (u32 I = 0; I < full1; ++I)
            for (u32 J = 0; J < full1; ++J) {
                if ((I | J) == 0) continue;
                const int sgn = ((std::popcount(I) + std::popcount(J)) % 2 == 0) ? 1 : -1;
                out.kappa1 += sgn * lam(I | J);
            }
        for (u32 I = 0; I < full2; ++I)
            for (u32 J = 0; J < full2; ++J) {
                if ((I | J) == 0) continue;
                const int sgn = ((std::popcount(I) + std::popcount(J)) % 2 == 0) ? 1 : -1;
                out.kappa2 += sgn * lam(I | J);
            }
    }
    return out;
}

}  // namespace gt2
