#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace seedbank {

// Runs fn(replica) for every replica in [0, n). Each replica must write only
// into its own preallocated slot; reductions happen afterwards in replica
// order, so results are bit-identical for any thread count.
inline void run_replicas(std::int64_t n, int threads,
                         const std::function<void(std::int64_t)>& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n < 2 * threads) {
        for (std::int64_t r = 0; r < n; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        const std::int64_t lo = n * w / threads;
        const std::int64_t hi = n * (w + 1) / threads;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t r = lo; r < hi; ++r) fn(r);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace seedbank
