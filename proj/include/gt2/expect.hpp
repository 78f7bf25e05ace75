// The expectation engine behind every correlation check: exact averages over
// small domains, seeded Monte Carlo over large ones. Sampling uses the
// counter RNG with fixed 65536-sample chunks reduced in chunk order, so a
// report is a pure function of (kernel, domain, budget, seed) regardless of
// thread count.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gt2/common.hpp"
#include "gt2/parallel.hpp"
#include "gt2/rng.hpp"

namespace gt2 {

struct CorrelationReport {
    double estimate = 0.0;
    double stderr_est = 0.0;  // 0 for exact evaluations
    u64 samples = 0;
    bool exact = false;
    double target = 1.0;
    u64 form_count = 0;
    u64 seed = 0;
    std::string label;
};

inline constexpr u64 kExactDomainBudget = 100'000'000ull;
inline constexpr u64 kMcChunk = 65536;

// Exact mean of kernel(i) for i in [0, domain).
inline CorrelationReport expectation_exact(u64 domain, const std::function<double(u64)>& kernel) {
    if (domain == 0) throw ValidationError("expectation: empty domain");
    if (domain > kExactDomainBudget)
        throw ResourceError("expectation: exact mode domain exceeds 1e8 evaluations");
    CorrelationReport rep;
    rep.exact = true;
    rep.samples = domain;
    rep.estimate = parallel_sum(domain, kMcChunk, kernel) / double(domain);
    return rep;
}

// Monte Carlo mean of kernel(draw) where draw(i, dim) must be derived from
// counter_uniform(seed, ...) by the caller-supplied sampler.
inline CorrelationReport expectation_mc(u64 budget, u64 seed,
                                        const std::function<double(u64)>& sample_value) {
    if (budget == 0) throw ValidationError("expectation: Monte-Carlo budget must be positive");
    const size_t nchunks = static_cast<size_t>((budget + kMcChunk - 1) / kMcChunk);
    std::vector<double> sums(nchunks, 0.0), sqs(nchunks, 0.0);
    parallel_chunks(budget, kMcChunk, [&](const ChunkRange& cr) {
        double s = 0.0, s2 = 0.0;
        for (u64 i = cr.begin; i < cr.end; ++i) {
            const double v = sample_value(i);
            s += v;
            s2 += v * v;
        }
        sums[cr.index] = s;
        sqs[cr.index] = s2;
    });
    double s = 0.0, s2 = 0.0;
    for (size_t c = 0; c < nchunks; ++c) {
        s += sums[c];
        s2 += sqs[c];
    }
    CorrelationReport rep;
    rep.samples = budget;
    rep.seed = seed;
    rep.estimate = s / double(budget);
    const double var = std::max(0.0, s2 / double(budget) - rep.estimate * rep.estimate);
    rep.stderr_est = std::sqrt(var / double(budget));
    return rep;
}

}  // namespace gt2
