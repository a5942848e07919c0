#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace periheat::detail {

inline int thread_count() {
    if (const char* env = std::getenv("PERIHEAT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run body(i) for i in [0,n). Work items are disjoint and each item's
/// internal summation order is fixed, so results are deterministic
/// regardless of scheduling.
template <class Body>
inline void parallel_for(int n, Body&& body) {
    const int threads = std::min(thread_count(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace periheat::detail
