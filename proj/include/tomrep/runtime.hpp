// runtime.hpp
// Thread-cap handling (TOMREP_THREADS) and a deterministic chunked
// parallel loop. Work is always split into the same fixed chunks and the
// per-chunk results are combined in chunk order, so the result is
// bit-identical no matter how many threads actually run.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <cstddef>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace tomrep::rt {

// Number of worker threads the library may use. Controlled by the
// TOMREP_THREADS environment variable; defaults to 1.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("TOMREP_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    return 1u;
}

// Runs chunk_fn(chunk_index, begin, end) for a fixed partition of
// [0, n_items) into n_chunks pieces. The partition does not depend on the
// thread count; callers reduce their per-chunk buffers in index order.
inline void for_chunks(std::size_t n_items, std::size_t n_chunks,
                       const std::function<void(std::size_t, std::size_t, std::size_t)>& chunk_fn) {
    if (n_items == 0) return;
    n_chunks = std::max<std::size_t>(1, std::min(n_chunks, n_items));
    const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(n_chunks));

    auto chunk_bounds = [&](std::size_t c) {
        const std::size_t base = n_items / n_chunks, rem = n_items % n_chunks;
        const std::size_t begin = c * base + std::min(c, rem);
        const std::size_t end = begin + base + (c < rem ? 1 : 0);
        return std::pair<std::size_t, std::size_t>{begin, end};
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            auto [b, e] = chunk_bounds(c);
            chunk_fn(c, b, e);
        }
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t c = w; c < n_chunks; c += workers) {
                auto [b, e] = chunk_bounds(c);
                chunk_fn(c, b, e);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace tomrep::rt
