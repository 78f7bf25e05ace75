// Explicit arithmetic progressions inside P2 (and inside the W-tricked
// residue class). A witness carries per-term two-squares certificates for
// p - 1 and re-verifies independently of the search.
//
// find_aps reports maximal runs: for each ordered member pair (p1, p2) taken
// as the first two terms, the run is extended greedily and reported once,
// anchored at its left end (a - d not a member). Sub-progressions of the
// same difference are suppressed unless include_subprogressions is set.
#pragma once

#include <algorithm>
#include <unordered_set>
#include <vector>

#include "gt2/arith.hpp"
#include "gt2/sieve.hpp"

namespace gt2 {

struct APWitness {
    u64 a = 0;
    u64 d = 0;
    u32 k = 0;
    std::vector<TwoSquaresCert> certs;  // one per term, for p - 1
};

// Membership storage: hash set below 1e7 members,
// sorted-array binary search above.
class MemberSet {
public:
    explicit MemberSet(const std::vector<u64>& sorted_members) : sorted_(sorted_members) {
        if (sorted_.size() < 10'000'000) {
            hash_.reserve(sorted_.size() * 2);
            hash_.insert(sorted_.begin(), sorted_.end());
            use_hash_ = true;
        }
    }

    bool contains(u64 v) const {
        if (use_hash_) return hash_.count(v) != 0;
        return std::binary_search(sorted_.begin(), sorted_.end(), v);
    }

private:
    const std::vector<u64>& sorted_;
    std::unordered_set<u64> hash_;
    bool use_hash_ = false;
};

// All maximal APs of length >= k among `members` (ascending, all <= x_max),
// sorted by (a, d); stops after `limit` witnesses when limit > 0.
inline std::vector<APWitness> find_aps(const std::vector<u64>& members, u64 x_max, u32 k,
                                       u64 limit = 0, bool include_subprogressions = false,
                                       bool zero_allowed = true, bool with_certs = true) {
    if (k < 3) throw ValidationError("find_aps: k must be >= 3");
    std::vector<APWitness> out;
    if (members.size() < k) return out;
    MemberSet set(members);
    for (size_t i = 0; i < members.size(); ++i) {
        const u64 a = members[i];
        if (a + (u64(k) - 1) > x_max) break;  // even d = 1 cannot fit
        for (size_t j = i + 1; j < members.size(); ++j) {
            const u64 d = members[j] - a;
            if (a + (u64(k) - 1) * d > x_max) break;
            if (!include_subprogressions && a >= d && set.contains(a - d)) continue;  // not leftmost
            u32 len = 2;
            u64 next = members[j] + d;
            while (next <= x_max && set.contains(next)) {
                ++len;
                next += d;
            }
            if (len < k) continue;
            APWitness w;
            w.a = a;
            w.d = d;
            w.k = len;
            if (with_certs)
                for (u32 t = 0; t < len; ++t) {
                    auto cert = two_squares(a + t * d - 1, false, zero_allowed);
                    if (!cert)
                        throw IdentityViolation("find_aps: member fails certificate search");
                    w.certs.push_back(*cert);
                }
            out.push_back(std::move(w));
            if (limit > 0 && out.size() >= limit) return out;
        }
    }
    return out;
}

// Independent re-derivation: every term must be prime, its p-1 must admit a
// representation (fresh search), and the supplied certificates must check.
inline bool verify_ap(const APWitness& w, bool zero_allowed = true) {
    if (w.d == 0 || w.k < 3) return false;
    if (!w.certs.empty() && w.certs.size() != w.k) return false;
    for (u32 t = 0; t < w.k; ++t) {
        const u64 p = w.a + u64(t) * w.d;
        if (!is_prime(p)) return false;
        if (!two_squares(p - 1, false, zero_allowed)) return false;
        if (!w.certs.empty()) {
            const auto& c = w.certs[t];
            if (c.n != p - 1 || !c.check()) return false;
        }
    }
    return true;
}

struct ClassAPResult {
    std::vector<APWitness> p_space;  // witnesses with a, d in prime space
    std::vector<std::pair<u64, u64>> n_space;  // matching (a_n, d_n)
};

// APs among { n in [n_lo, n_hi] : q0^2(Wn + b) + 1 in R_q0 (and in A) },
// mapped to p-space via the affine map p = q0^2 W n + (q0^2 b + 1); an AP in
// n-space with difference d becomes one in p-space with difference q0^2 W d.
inline ClassAPResult find_aps_in_class(u64 W, u64 q0, u64 b, u64 n_lo, u64 n_hi, u32 k,
                                       u64 limit = 0, const std::vector<u64>* subset_a = nullptr,
                                       bool zero_allowed = true) {
    if (k < 3) throw ValidationError("find_aps_in_class: k must be >= 3");
    if (n_hi < n_lo) throw ValidationError("find_aps_in_class: empty n range");
    std::vector<u64> ns;
    for (u64 n = n_lo; n <= n_hi; ++n) {
        const u128 arg2 = static_cast<u128>(W) * n + b;
        const u128 arg1 = static_cast<u128>(q0) * q0 * arg2 + 1;
        if (arg1 > ~u64{0}) throw ValidationError("find_aps_in_class: theta exceeds 64 bits");
        const u64 p = static_cast<u64>(arg1);
        if (!is_prime(p)) continue;
        if (!primitive_two_squares_admissible(factorize(static_cast<u64>(arg2)), zero_allowed))
            continue;
        if (subset_a && !std::binary_search(subset_a->begin(), subset_a->end(), p)) continue;
        ns.push_back(n);
    }
    ClassAPResult out;
    auto naps = find_aps(ns, n_hi, k, limit, false, zero_allowed, /*with_certs=*/false);
    const u64 q2W = q0 * q0 * W;
    for (const auto& nap : naps) {
        APWitness w;
        w.a = q2W * nap.a + q0 * q0 * b + 1;
        w.d = q2W * nap.d;
        w.k = nap.k;
        for (u32 t = 0; t < nap.k; ++t) {
            auto cert = two_squares(w.a + u64(t) * w.d - 1, false, zero_allowed);
            if (!cert) throw IdentityViolation("find_aps_in_class: certificate search failed");
            w.certs.push_back(*cert);
        }
        out.p_space.push_back(std::move(w));
        out.n_space.emplace_back(nap.a, nap.d);
    }
    return out;
}

}  // namespace gt2
