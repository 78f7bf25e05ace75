// The pseudorandom measure nu and its companion f over Z_N.
//
// Parameters: eps_m = 1/(4^m (m+4)!) exactly; N the smallest prime in
// [X / (q0^2 W eps_m), + X (log X)^-2] (window doubled on failure, with the
// widening count recorded); R = N^{1/(2^{m+4} m)} unless a gamma override is
// given (the paper exponent makes R ~ 1 at desk scale).
//
// On the window [eps_m N, 2 eps_m N]:
//   nu(n) = (log R)^{3/2} / (alpha0^{1/2} C_chi)
//           * prod_{p != 3 mod 4, p | W} (1 - 1/p)
//           * prod_{p  = 3 mod 4, p | W} (1 - 1/p)^2
//           * Lambda_R(q0^2(Wn+b)+1)^2 * Lambda_R*(Wn+b)^2,
// and nu = 1 elsewhere; f(n) is the same normalization without the Lambda
// factors when q0^2(Wn+b)+1 lands in R_q0 ∩ A, else 0.
//
// The empirical C_chi variant is the exact window average of the
// unnormalized kernel, which forces E(nu | window) = 1 by construction.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gt2/arith.hpp"
#include "gt2/constants.hpp"
#include "gt2/sieve.hpp"
#include "gt2/weights.hpp"

namespace gt2 {

inline u64 epsilon_denominator(u32 m) {
    if (m < 1 || m > 12) throw ValidationError("epsilon_m: m out of supported range [1, 12]");
    u128 den = 1;
    for (u32 i = 0; i < m; ++i) den *= 4;
    for (u64 k = 2; k <= u64(m) + 4; ++k) den *= k;
    if (den > ~u64{0}) throw ResourceError("epsilon_m denominator overflows 64 bits");
    return static_cast<u64>(den);
}

struct MeasureParams {
    u32 m = 3;
    u64 eps_den = 322560;  // eps_m = 1 / eps_den
    u64 W = 1;
    u64 w = 1;
    u64 q0 = 1;
    u64 b = 1;
    u64 N = 0;
    double R = 1.0;
    std::optional<double> gamma_override;
    u64 window_lo = 0, window_hi = 0;  // inclusive
    u32 widenings = 0;
    bool paper_exponent = true;

    u64 window_len() const { return window_hi >= window_lo ? window_hi - window_lo + 1 : 0; }
};

inline MeasureParams build_measure_params(u64 X, u32 m, u64 w, u64 W, u64 q0, u64 b,
                                          std::optional<double> gamma_override) {
    if (X < 16) throw ValidationError("build_measure_params: X too small");
    if (m < 3) throw ValidationError("build_measure_params: m must be >= 3");
    if (b < 1 || b > W) throw ValidationError("build_measure_params: b must lie in [1, W]");
    {
        // b must be an S_W member: q0^2 b + 1 coprime to W, gcd(b, W) free of
        // primes = 3 mod 4
        const u64 t = ((q0 % W) * (q0 % W) % W * (b % W) + 1) % W;
        if (gcd_u64(t, W) != 1)
            throw ValidationError("build_measure_params: q0^2 b + 1 shares a factor with W");
        u64 g = gcd_u64(b, W);
        for (const auto& pe : factorize(g).factors)
            if (pe.prime % 4 == 3)
                throw ValidationError("build_measure_params: gcd(b, W) has a 3 mod 4 factor");
    }
    MeasureParams mp;
    mp.m = m;
    mp.w = w;
    mp.eps_den = epsilon_denominator(m);
    mp.W = W;
    mp.q0 = q0;
    mp.b = b;
    mp.gamma_override = gamma_override;

    const u128 base128 = static_cast<u128>(X) * mp.eps_den / (static_cast<u128>(q0) * q0 * W);
    if (base128 > ~u64{0} / 4) throw ResourceError("build_measure_params: N window overflows");
    const u64 base = static_cast<u64>(base128);
    const double logX = std::log(double(X));
    u64 width = std::max<u64>(2, u64(double(X) / (logX * logX)));
    u64 N = 0;
    for (u32 k = 0; k < 48; ++k) {
        for (u64 c = base; c <= base + width; ++c) {
            if (is_prime(c)) {
                N = c;
                break;
            }
        }
        if (N != 0) {
            mp.widenings = k;
            break;
        }
        width *= 2;
    }
    if (N == 0) throw ResourceError("build_measure_params: no prime found after widening");
    mp.N = N;
    if (gamma_override) {
        if (*gamma_override <= 0.0 || *gamma_override >= 0.5)
            throw ValidationError("gamma override must lie in (0, 1/2)");
        mp.R = std::pow(double(N), *gamma_override);
        mp.paper_exponent = false;
    } else {
        const double expo = 1.0 / (std::pow(2.0, double(m) + 4.0) * double(m));
        mp.R = std::pow(double(N), expo);
        mp.paper_exponent = true;
    }
    mp.window_lo = (N + mp.eps_den - 1) / mp.eps_den;  // ceil(eps N)
    mp.window_hi = static_cast<u64>((2 * static_cast<u128>(N)) / mp.eps_den);  // floor(2 eps N)
    return mp;
}

enum class NuMode { Nu, F };

class NuEvaluator {
public:
    NuEvaluator(const MeasureParams& params, const NormalizationConstants& consts,
                const std::vector<u64>* subset_a = nullptr, bool zero_allowed = true)
        : params_(params),
          sums_(params.R),
          subset_a_(subset_a),
          zero_allowed_(zero_allowed),
          c_chi_(consts.c_chi) {
        if (!(c_chi_ > 0.0)) throw ValidationError("nu: C_chi must be positive");
        norm_base_ = std::pow(std::log(params_.R), 1.5) / std::sqrt(consts.alpha0);
        for (const auto& pe : factorize(params_.W).factors) {
            const double f = 1.0 - 1.0 / double(pe.prime);
            norm_base_ *= (pe.prime % 4 == 3) ? f * f : f;
        }
        // largest n must keep q0^2 (W n + b) + 1 inside 64 bits
        const u128 worst = static_cast<u128>(params_.q0) * params_.q0 *
                               (static_cast<u128>(params_.W) * params_.window_hi + params_.b) +
                           1;
        if (worst > ~u64{0})
            throw ValidationError("nu: q0^2(Wn+b)+1 exceeds 64 bits on the window");
    }

    const MeasureParams& params() const { return params_; }
    double norm_base() const { return norm_base_; }
    double c_chi() const { return c_chi_; }

    bool in_window(u64 n) const { return n >= params_.window_lo && n <= params_.window_hi; }

    // Unnormalized kernel (no 1/C_chi): norm_base * Lambda^2 * LambdaStar^2.
    double kernel(u64 n) const {
        const u64 arg2 = params_.W * n + params_.b;
        const u64 arg1 = params_.q0 * params_.q0 * arg2 + 1;
        const double l = sums_.lambda(arg1);
        const double ls = sums_.lambda_star(arg2);
        return norm_base_ * l * l * ls * ls;
    }

    double nu(u64 n) const {
        if (!in_window(n)) return 1.0;
        return kernel(n) / c_chi_;
    }

    bool class_member(u64 n) const {
        const u64 arg2 = params_.W * n + params_.b;
        const u64 arg1 = params_.q0 * params_.q0 * arg2 + 1;
        if (!is_prime(arg1)) return false;
        if (!primitive_two_squares_admissible(factorize(arg2), zero_allowed_)) return false;
        if (subset_a_ && !std::binary_search(subset_a_->begin(), subset_a_->end(), arg1))
            return false;
        return true;
    }

    double f(u64 n) const {
        if (!in_window(n)) return 0.0;
        return class_member(n) ? norm_base_ / c_chi_ : 0.0;
    }

    // Exact E(nu | Z_N) (the off-window mass contributes exactly 1).
    double exact_mean_nu() const {
        double acc = 0.0;
        for (u64 n = params_.window_lo; n <= params_.window_hi; ++n) acc += nu(n) - 1.0;
        return 1.0 + acc / double(params_.N);
    }

    double exact_mean_f() const {
        double acc = 0.0;
        for (u64 n = params_.window_lo; n <= params_.window_hi; ++n) acc += f(n);
        return acc / double(params_.N);
    }

    // Exact window mean of the unnormalized kernel == the empirical C_chi.
    double window_kernel_mean() const {
        if (params_.window_hi < params_.window_lo)
            throw ValidationError("nu: empty measure window");
        double acc = 0.0;
        for (u64 n = params_.window_lo; n <= params_.window_hi; ++n) acc += kernel(n);
        return acc / double(params_.window_len());
    }

private:
    MeasureParams params_;
    TruncatedDivisorSums sums_;
    const std::vector<u64>* subset_a_;
    bool zero_allowed_;
    double c_chi_;
    double norm_base_ = 1.0;
};

// Empirical C_chi: window average of the unnormalized kernel at these params.
inline double calibrate_empirical_c_chi(const MeasureParams& params, double alpha0) {
    NormalizationConstants tmp;
    tmp.alpha0 = alpha0;
    tmp.c_chi = 1.0;  // placeholder; kernel() does not divide by it
    NuEvaluator ev(params, tmp);
    return ev.window_kernel_mean();
}

}  // namespace gt2
