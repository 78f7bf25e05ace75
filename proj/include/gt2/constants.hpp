// The normalization constants of the measure:
//
//   alpha0   = lim_{s->1} (1/(s-1)) prod_{p = 3 mod 4} (1 - p^-s)^2,
//   upsilon0 = min_{x>=2} prod_{p != 3 mod 4, p<=x} (1-1/p)^{-1/2}
//                       * prod_{p = 3 mod 4, p<=x} (1-1/p)^{1/2},
//   C_chi    in three variants (see CChiVariant).
//
// alpha0 is computed two independent ways and the gap is reported:
//  (a) the defining limit, evaluated on truncated Euler products with an
//      explicit exp(-E1(delta log P)) compensation for the truncated tail
//      (prime-number-theorem density estimate) and extrapolated to delta = 0
//      by Newton interpolation over the delta schedule;
//  (b) the closed form alpha0 = 2 L(1, chi_4) prod_{p=3 mod 4}(1 - p^-2)
//      = (pi/2) prod (1 - p^-2), whose quadratic tail is bracketed by
//      sum_{p>P} p^-2 and attached as an interval.
#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "gt2/common.hpp"
#include "gt2/cutoff.hpp"
#include "gt2/parallel.hpp"

namespace gt2 {

// Exponential integral E1(x) for x > 0: series below 1, Lentz continued
// fraction above.
inline double exp_integral_e1(double x) {
    if (x <= 0.0) throw ValidationError("E1 requires x > 0");
    if (x <= 1.0) {
        const double euler_gamma = 0.57721566490153286;
        double sum = 0.0, term = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -x / k;
            sum += term / k;
        }
        return -euler_gamma - std::log(x) - sum;
    }
    double b = x + 1.0, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -double(i) * double(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

struct Alpha0Result {
    double method_a = 0.0;  // limit extrapolation
    double method_b = 0.0;  // closed-form route
    double gap_rel = 0.0;
    double tail_low = 0.0;  // interval from the quadratic tail bound (method b)
    double tail_high = 0.0;
    std::vector<double> schedule;
    std::vector<double> schedule_values;
};

// primes: all primes <= prime_limit, ascending.
inline Alpha0Result compute_alpha0(const std::vector<u64>& primes, u64 prime_limit,
                                   std::vector<double> delta_schedule = {0.08, 0.04, 0.02, 0.01}) {
    if (prime_limit > 100'000'000ull)
        throw ResourceError("compute_alpha0: prime_limit exceeds 1e8");
    if (delta_schedule.empty()) throw ValidationError("compute_alpha0: empty schedule");
    const double logPlim = std::log(double(prime_limit));
    for (double d : delta_schedule) {
        if (d <= 0.0) throw ValidationError("compute_alpha0: schedule deltas must be positive");
        if (d * logPlim < 0.15)
            throw ResourceError("compute_alpha0: schedule too aggressive for prime_limit");
    }

    Alpha0Result out;
    out.schedule = delta_schedule;

    // ---- method (a)
    for (double d : delta_schedule) {
        const double s = 1.0 + d;
        const double P = (10.0 / d >= logPlim) ? double(prime_limit) : std::exp(10.0 / d);
        double lg = 0.0;
        for (u64 p : primes) {
            if (double(p) > P) break;
            if (p % 4 == 3) lg += 2.0 * std::log1p(-std::pow(double(p), -s));
        }
        lg -= exp_integral_e1(d * std::log(P));  // truncated-tail compensation
        out.schedule_values.push_back(std::exp(lg) / d);
    }
    {
        // Newton divided differences, evaluated at delta = 0.
        const size_t n = delta_schedule.size();
        std::vector<long double> xs(delta_schedule.begin(), delta_schedule.end());
        std::vector<long double> coef(out.schedule_values.begin(), out.schedule_values.end());
        for (size_t j = 1; j < n; ++j)
            for (size_t i = n - 1; i >= j; --i)
                coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j]);
        long double acc = coef[n - 1];
        for (size_t j = n - 1; j-- > 0;) acc = coef[j] + (0.0L - xs[j]) * acc;
        out.method_a = double(acc);
    }

    // ---- method (b)
    {
        double lg = 0.0;
        for (u64 p : primes)
            if (p % 4 == 3) lg += std::log1p(-1.0 / (double(p) * double(p)));
        const double partial = (M_PI / 2.0) * std::exp(lg);
        // 0 <= -log(prod_{p>P}(1-p^-2)) <= ~ sum_{p>P} p^-2 * (1 + eps), and
        // sum_{p>P} p^-2 < 1 / P.
        const double tail = 1.0 / double(prime_limit);
        out.method_b = partial;
        out.tail_low = partial * (1.0 - 2.0 * tail);
        out.tail_high = partial;
    }
    out.gap_rel = std::abs(out.method_a - out.method_b) / out.method_b;
    return out;
}

// Partial product of method (b) at cutoff P (used by the one-factor example
// (pi/2)(1 - 1/9) = 4 pi / 9 and by tests).
inline double alpha0_partial_product(const std::vector<u64>& primes, u64 P) {
    double lg = 0.0;
    for (u64 p : primes) {
        if (p > P) break;
        if (p % 4 == 3) lg += std::log1p(-1.0 / (double(p) * double(p)));
    }
    return (M_PI / 2.0) * std::exp(lg);
}

// Tail-compensated (1/(s-1)) prod_{p in class, p<=P} (1 - p^-s)^2 for either
// residue class; the product over both classes tends to 1 (sanity identity).
inline double alpha0_class_partial(const std::vector<u64>& primes, u64 prime_limit, double delta,
                                   bool class3) {
    const double s = 1.0 + delta;
    const double logPlim = std::log(double(prime_limit));
    const double P = (10.0 / delta >= logPlim) ? double(prime_limit) : std::exp(10.0 / delta);
    double lg = 0.0;
    for (u64 p : primes) {
        if (double(p) > P) break;
        if ((p % 4 == 3) == class3) lg += 2.0 * std::log1p(-std::pow(double(p), -s));
    }
    lg -= exp_integral_e1(delta * std::log(P));
    return std::exp(lg) / delta;
}

struct Upsilon0Result {
    double value = 0.0;
    u64 argmin = 2;
    bool stabilized = false;  // successive checkpoint change < 1e-6 at the end
    double final_value = 0.0;
};

inline Upsilon0Result compute_upsilon0(const std::vector<u64>& primes, u64 x_limit) {
    if (x_limit > 100'000'000ull) throw ResourceError("compute_upsilon0: x_limit exceeds 1e8");
    Upsilon0Result out;
    double lg = 0.0;
    double best = 1e300;
    double prev = 1e300;
    double last_change = 1e300;
    for (u64 p : primes) {
        if (p > x_limit) break;
        const double t = std::log1p(-1.0 / double(p));
        lg += (p % 4 == 3) ? 0.5 * t : -0.5 * t;
        const double v = std::exp(lg);
        if (v < best) {
            best = v;
            out.argmin = p;
        }
        if (prev < 1e299) last_change = std::abs(v - prev);
        prev = v;
    }
    out.value = best;
    out.final_value = prev;
    out.stabilized = last_change < 1e-6;
    return out;
}

enum class CChiVariant { PaperFormula, Factorized, Empirical };

inline std::string to_string(CChiVariant v) {
    switch (v) {
        case CChiVariant::PaperFormula: return "paper-formula";
        case CChiVariant::Factorized: return "factorized";
        case CChiVariant::Empirical: return "empirical";
    }
    return "?";
}

namespace detail {

// iint K(s,t) psi(s) psi(t) ds dt over the tabulated grid, with
// K = (1+is)^a (1+it)^a (2+is+it)^{-a}; principal branch per factor.
inline double cchi_double_integral(const PsiTransform& psi, double a) {
    const size_t n = psi.grid.size();
    std::vector<std::complex<double>> pw(n);  // (1+it)^a * psi(t) * weight(t)
    for (size_t i = 0; i < n; ++i) {
        const std::complex<double> z(1.0, psi.grid[i]);
        pw[i] = std::pow(z, a) * psi.value[i] * psi.weight(i);
    }
    std::vector<double> rows(n, 0.0);
    parallel_chunks(n, 256, [&](const ChunkRange& cr) {
        for (u64 i = cr.begin; i < cr.end; ++i) {
            std::complex<double> acc{0.0, 0.0};
            for (size_t j = 0; j < n; ++j) {
                const std::complex<double> den(2.0, psi.grid[i] + psi.grid[j]);
                acc += pw[i] * pw[j] * std::pow(den, -a);
            }
            rows[i] = acc.real();  // conjugate symmetry: imaginary parts cancel
        }
    });
    double s = 0.0;
    for (double v : rows) s += v;
    return s;
}

// I1 specialization (a = 1): no complex pow in the inner loop.
inline double cchi_i1(const PsiTransform& psi) {
    const size_t n = psi.grid.size();
    std::vector<std::complex<double>> pw(n);
    for (size_t i = 0; i < n; ++i)
        pw[i] = std::complex<double>(1.0, psi.grid[i]) * psi.value[i] * psi.weight(i);
    std::vector<double> rows(n, 0.0);
    parallel_chunks(n, 256, [&](const ChunkRange& cr) {
        for (u64 i = cr.begin; i < cr.end; ++i) {
            std::complex<double> acc{0.0, 0.0};
            for (size_t j = 0; j < n; ++j)
                acc += pw[i] * pw[j] / std::complex<double>(2.0, psi.grid[i] + psi.grid[j]);
            rows[i] = acc.real();
        }
    });
    double s = 0.0;
    for (double v : rows) s += v;
    return s;
}

}  // namespace detail

// The displayed double integral with exponent 3/2 on each factor.
inline double c_chi_paper(const PsiTransform& psi) {
    return detail::cchi_double_integral(psi, 1.5);
}

// The constant produced by the Psi_1 Psi_2 factorization: I1 * I2, where
// indices j <= m carry the full-power kernel and j > m the half-power one.
inline double c_chi_factorized(const PsiTransform& psi) {
    const double i1 = detail::cchi_i1(psi);
    const double i2 = detail::cchi_double_integral(psi, 0.5);
    return i1 * i2;
}

inline double c_chi_i1(const PsiTransform& psi) { return detail::cchi_i1(psi); }
inline double c_chi_i2(const PsiTransform& psi) { return detail::cchi_double_integral(psi, 0.5); }

struct NormalizationConstants {
    double alpha0 = 0.0;
    double upsilon0 = 0.0;
    double c_chi = 0.0;
    CChiVariant c_chi_variant = CChiVariant::Empirical;
    // companions, for reporting
    double c_chi_paper = 0.0;
    double c_chi_factorized = 0.0;
    double c_chi_empirical = 0.0;  // 0 when not calibrated
    double alpha0_method_a = 0.0;
    double alpha0_gap_rel = 0.0;
    double alpha0_tail_low = 0.0;   // quadratic-tail interval of method (b)
    double alpha0_tail_high = 0.0;
    double psi_residual = 0.0;

    void validate() const {
        if (!(c_chi > 0.0))
            throw IdentityViolation("C_chi must be positive");
        if (alpha0_gap_rel > 1e-4)
            throw IdentityViolation("alpha0 two-method agreement worse than 1e-4");
    }
};

}  // namespace gt2
