#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace cospace {

// Runs fn(begin, end) over contiguous chunks of [0, total). Workers write
// results into preallocated per-index slots, so output is identical for any
// thread count. threads <= 1 runs inline.
template <typename Fn>
void parallel_for(std::size_t total, int threads, Fn&& fn) {
    if (threads <= 1 || total < 2) {
        fn(std::size_t{0}, total);
        return;
    }
    const std::size_t nworkers = std::min<std::size_t>(threads, total);
    const std::size_t chunk = (total + nworkers - 1) / nworkers;
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (std::size_t w = 0; w < nworkers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(begin + chunk, total);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] { fn(begin, end); });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace cospace
