// Truncated divisor sums
//
//   Lambda_R(n)  = sum_{d | n} mu(d)  chi(log d / log R)
//   Lambda_R*(n) = sum_{d | n} mu_3(d) chi(log d / log R)
//
// Only squarefree d < R contribute (mu kills squares, chi kills d >= R), so
// the sums depend only on the distinct prime factors of n below R. The hot
// path pre-tabulates the primes < R with their chi weights and trial-divides
// the argument by just those primes; the generic path enumerates divisors
// from a Factorization.
#pragma once

#include <cmath>
#include <vector>

#include "gt2/arith.hpp"
#include "gt2/cutoff.hpp"

namespace gt2 {

namespace detail {

// Accumulates sum over squarefree divisors composed of the given primes,
// with sign (-1)^omega, weight chi(log d / log R), starting from index i.
inline double divisor_sum_rec(const std::vector<double>& logp, size_t i, double logd, double sign,
                              double logR) {
    double acc = 0.0;
    for (size_t j = i; j < logp.size(); ++j) {
        const double nl = logd + logp[j];
        if (nl >= logR) continue;  // chi vanishes; deeper products only grow
        acc += sign * chi_eval(nl / logR) + divisor_sum_rec(logp, j + 1, nl, -sign, logR);
    }
    return acc;
}

}  // namespace detail

// Generic evaluation from a factorization certificate.
inline double lambda_r(const Factorization& f, double R) {
    if (R <= 1.0) return 1.0;  // only d = 1 survives
    const double logR = std::log(R);
    std::vector<double> logp;
    for (const auto& pe : f.factors) {
        if (double(pe.prime) < R) logp.push_back(std::log(double(pe.prime)));
    }
    return 1.0 + detail::divisor_sum_rec(logp, 0, 0.0, -1.0, logR);
}

inline double lambda_r_star(const Factorization& f, double R) {
    if (R <= 1.0) return 1.0;
    const double logR = std::log(R);
    std::vector<double> logp;
    for (const auto& pe : f.factors) {
        if (pe.prime % 4 == 3 && double(pe.prime) < R) logp.push_back(std::log(double(pe.prime)));
    }
    return 1.0 + detail::divisor_sum_rec(logp, 0, 0.0, -1.0, logR);
}

inline double lambda_r(u64 n, double R) { return lambda_r(factorize(n), R); }
inline double lambda_r_star(u64 n, double R) { return lambda_r_star(factorize(n), R); }

// Pre-tabulated evaluator for tight loops: holds the primes < R and answers
// Lambda_R / Lambda_R* by trial division over that short list only.
class TruncatedDivisorSums {
public:
    explicit TruncatedDivisorSums(double R) : R_(R), logR_(R > 1.0 ? std::log(R) : 0.0) {
        if (R_ > 1.0) {
            for (u64 p = 2; double(p) < R_; ++p) {
                if (is_prime(p)) {
                    primes_.push_back(p);
                    logp_.push_back(std::log(double(p)));
                    is3_.push_back(p % 4 == 3);
                }
            }
        }
    }

    double R() const { return R_; }
    bool trivial() const { return primes_.empty(); }

    double lambda(u64 n) const { return eval(n, /*mu3_only=*/false); }
    double lambda_star(u64 n) const { return eval(n, /*mu3_only=*/true); }

private:
    double eval(u64 n, bool mu3_only) const {
        if (primes_.empty()) return 1.0;
        // n < 2^64 has at most 15 distinct prime factors
        double lp[16];
        size_t cnt = 0;
        for (size_t i = 0; i < primes_.size(); ++i) {
            if (mu3_only && !is3_[i]) continue;
            if (n % primes_[i] == 0) lp[cnt++] = logp_[i];
        }
        return 1.0 + rec(lp, cnt, 0, 0.0, -1.0);
    }

    double rec(const double* lp, size_t cnt, size_t i, double logd, double sign) const {
        double acc = 0.0;
        for (size_t j = i; j < cnt; ++j) {
            const double nl = logd + lp[j];
            if (nl >= logR_) continue;
            acc += sign * chi_eval(nl / logR_) + rec(lp, cnt, j + 1, nl, -sign);
        }
        return acc;
    }

    double R_;
    double logR_;
    std::vector<u64> primes_;
    std::vector<double> logp_;
    std::vector<bool> is3_;
};

}  // namespace gt2
