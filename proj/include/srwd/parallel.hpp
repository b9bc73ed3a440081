#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace srwd {

// Runs fn(i) for i in [0, n). Results must be written into per-index slots by
// the caller and reduced in index order afterwards, so the outcome does not
// depend on the worker count.
template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t workers = std::min<size_t>(size_t(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace srwd
