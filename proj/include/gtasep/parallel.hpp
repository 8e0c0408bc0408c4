#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gtasep {

// Worker count from GTASEP_THREADS, default 1.
inline int thread_count() {
    static const int n = [] {
        const char* s = std::getenv("GTASEP_THREADS");
        int v = s ? std::atoi(s) : 1;
        return std::clamp(v, 1, 256);
    }();
    return n;
}

// Runs f(i) for i in [0, n); static striping over the worker pool.
template <class F>
void parallel_for(long n, F&& f) {
    int w = std::min<long>(thread_count(), n);
    if (w <= 1) {
        for (long i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k)
        pool.emplace_back([&, k] {
            for (long i = k; i < n; i += w) f(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace gtasep
