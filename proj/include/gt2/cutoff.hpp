// The smooth cutoff chi and its Fourier companion psi, defined by
//
//     e^x chi(x) = int_R psi(t) e^{-ixt} dt,
//     psi(t) = (1/2pi) int_{-1}^{1} e^x chi(x) e^{ixt} dx.
//
// chi is the standard bump exp(1 - 1/(1-x^2)) on (-1, 1): closed form,
// C-infinity, chi(0) = 1, support exactly [-1, 1]. Since e^x chi(x) vanishes
// to all orders at the endpoints, composite trapezoid quadrature converges
// spectrally; the per-node rule is refined until the grid stabilizes.
//
// psi is tabulated on a uniform grid [-T, T]. Because e^x chi is supported in
// [-1, 1], trapezoid sums over the psi grid reproduce e^x chi(x) up to the
// tail truncated at T (Poisson summation: aliases sit at |x| >= 2pi/h - 1),
// which is what the stored reconstruction residual measures.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gt2/common.hpp"
#include "gt2/parallel.hpp"

namespace gt2 {

inline double chi_eval(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

inline double chi_prime(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    const double d = 1.0 - x * x;
    return std::exp(1.0 - 1.0 / d) * (-2.0 * x / (d * d));
}

struct PsiTransform {
    double T = 0.0;
    double step = 0.0;
    std::vector<double> grid;                 // t values, uniform in [-T, T]
    std::vector<std::complex<double>> value;  // psi(t)
    double reconstruction_residual = 0.0;     // max over 21 points of [-1, 1]
    double decay_constant = 0.0;              // fitted K with |psi| <= K (1+|t|)^-4
    int quadrature_panels = 0;

    std::complex<double> at(size_t i) const { return value[i]; }

    // trapezoid weight (interior 1, endpoints 1/2) times step
    double weight(size_t i) const {
        return (i == 0 || i + 1 == grid.size()) ? 0.5 * step : step;
    }
};

namespace detail {

// (1/2pi) int_{-1}^{1} e^x chi(x) e^{ixt} dx with M trapezoid panels.
inline std::complex<double> psi_point(double t, int M) {
    const double h = 2.0 / M;
    std::complex<double> acc{0.0, 0.0};
    for (int k = 1; k < M; ++k) {  // endpoints vanish
        const double x = -1.0 + k * h;
        const double f = std::exp(x) * chi_eval(x);
        acc += f * std::complex<double>(std::cos(x * t), std::sin(x * t));
    }
    return acc * (h / (2.0 * M_PI));
}

}  // namespace detail

// Tabulates psi on [-T, T] with the given grid step. The inner quadrature is
// refined (panel doubling) until the worst grid point moves by less than
// qtol; non-convergence raises a tolerance error.
inline PsiTransform compute_psi(double T = 240.0, double grid_step = 0.05,
                                double qtol = 1e-12) {
    if (T < 10.0) throw ValidationError("compute_psi: T must be >= 10");
    if (grid_step > 0.1 || grid_step <= 0.0)
        throw ValidationError("compute_psi: grid_step must be in (0, 0.1]");
    PsiTransform psi;
    psi.T = T;
    psi.step = grid_step;
    const size_t n = static_cast<size_t>(std::llround(2.0 * T / grid_step)) + 1;
    psi.grid.resize(n);
    psi.value.resize(n);
    for (size_t i = 0; i < n; ++i) psi.grid[i] = -T + double(i) * grid_step;

    // Panel count must resolve the oscillation e^{ixt} up to |t| = T.
    int M = 1024;
    while (M < 8 * T) M <<= 1;
    bool converged = false;
    const size_t half = n / 2;  // grid symmetric about 0: psi(-t) = conj psi(t)
    for (int round = 0; round < 6 && !converged; ++round) {
        std::vector<std::complex<double>> prev = psi.value;
        parallel_chunks(n - half, 2048, [&](const ChunkRange& cr) {
            for (u64 i = cr.begin; i < cr.end; ++i)
                psi.value[half + i] = detail::psi_point(psi.grid[half + i], M);
        });
        for (size_t i = 0; i < half; ++i) psi.value[i] = std::conj(psi.value[n - 1 - i]);
        if (round > 0) {
            double worst = 0.0;
            for (size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(psi.value[i] - prev[i]));
            converged = worst < qtol;
        }
        if (!converged) M <<= 1;
    }
    if (!converged)
        throw ResourceError("compute_psi: quadrature did not converge to tolerance");
    psi.quadrature_panels = M >> 1;

    double resid = 0.0;
    for (int j = 0; j <= 20; ++j) {
        const double x = -1.0 + j * 0.1;
        std::complex<double> rec{0.0, 0.0};
        for (size_t i = 0; i < n; ++i)
            rec += psi.value[i] * psi.weight(i) *
                   std::complex<double>(std::cos(x * psi.grid[i]), -std::sin(x * psi.grid[i]));
        resid = std::max(resid, std::abs(rec - std::exp(x) * chi_eval(x)));
    }
    psi.reconstruction_residual = resid;

    double K = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double t = std::abs(psi.grid[i]);
        K = std::max(K, std::abs(psi.value[i]) * std::pow(1.0 + t, 4.0));
    }
    psi.decay_constant = K;
    return psi;
}

}  // namespace gt2
