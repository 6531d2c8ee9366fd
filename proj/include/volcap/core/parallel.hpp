#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace volcap {

/// Runs fn(i) for i in [begin, end) over up to n_threads workers.
///
/// Work is split into contiguous chunks. Results must be written to
/// per-index storage by the caller; any reduction over that storage in index
/// order is then bit-identical for every thread count.
template <typename Fn>
void parallel_for(int begin, int end, int n_threads, Fn&& fn) {
    const int n = end - begin;
    if (n <= 0) return;
    n_threads = std::max(1, std::min(n_threads, n));
    if (n_threads == 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    const int chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        const int lo = begin + t * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn]() {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace volcap
