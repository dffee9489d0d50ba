#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace nucs {

/// Worker count honoring the NUCS_THREADS environment variable (0 or unset = auto).
inline unsigned worker_count() {
    static const unsigned cached = [] {
        unsigned n = 0;
        if (const char* env = std::getenv("NUCS_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v > 0) n = static_cast<unsigned>(v);
        }
        if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
        return n;
    }();
    return cached;
}

/// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks, so
/// results written to per-index slots are deterministic regardless of thread count.
/// The first exception thrown by any worker is rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(worker_count(), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, t, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace nucs
