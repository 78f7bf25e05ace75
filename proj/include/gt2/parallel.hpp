// Deterministic chunked parallelism: work is split into chunks whose
// boundaries depend only on the problem size (never on the thread count),
// each chunk produces its own partial result, and partials are combined in
// chunk order. Results are therefore bit-identical for any number of threads.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <functional>
#include <thread>
#include <vector>

#include "gt2/common.hpp"

namespace gt2 {

inline unsigned hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

struct ChunkRange {
    u64 begin;
    u64 end;  // half-open
    size_t index;
};

// Splits [0, total) into chunks of size chunk_size (last may be short) and
// runs body(chunk) across threads. Chunks are claimed from a shared counter;
// the body must write only into per-chunk slots.
inline void parallel_chunks(u64 total, u64 chunk_size,
                            const std::function<void(const ChunkRange&)>& body,
                            unsigned max_threads = 0) {
    if (total == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const size_t nchunks = static_cast<size_t>((total + chunk_size - 1) / chunk_size);
    unsigned nthreads = max_threads == 0 ? hardware_threads() : max_threads;
    nthreads = static_cast<unsigned>(std::min<size_t>(nthreads, nchunks));
    if (nthreads <= 1) {
        for (size_t c = 0; c < nchunks; ++c) {
            u64 b = static_cast<u64>(c) * chunk_size;
            body(ChunkRange{b, std::min(total, b + chunk_size), c});
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            size_t c = next.fetch_add(1);
            if (c >= nchunks) break;
            u64 b = static_cast<u64>(c) * chunk_size;
            try {
                body(ChunkRange{b, std::min(total, b + chunk_size), c});
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Chunked sum with deterministic (chunk-ordered) reduction.
// term(i) is evaluated for every i in [0, total).
template <typename Term>
double parallel_sum(u64 total, u64 chunk_size, Term&& term, unsigned max_threads = 0) {
    if (total == 0) return 0.0;
    if (chunk_size == 0) chunk_size = 1;
    const size_t nchunks = static_cast<size_t>((total + chunk_size - 1) / chunk_size);
    std::vector<double> partial(nchunks, 0.0);
    parallel_chunks(
        total, chunk_size,
        [&](const ChunkRange& cr) {
            double acc = 0.0;
            for (u64 i = cr.begin; i < cr.end; ++i) acc += term(i);
            partial[cr.index] = acc;
        },
        max_threads);
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

}  // namespace gt2
