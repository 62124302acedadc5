#ifndef SDEC_PARALLEL_HPP
#define SDEC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sdec {

namespace detail {
inline std::atomic<std::size_t> thread_budget{0}; // 0 = hardware concurrency
}

// Process-wide worker budget, settable once from the CLI (--threads).
inline void set_thread_budget(std::size_t n) { detail::thread_budget.store(n); }

inline std::size_t hardware_threads() {
    const std::size_t b = detail::thread_budget.load();
    if (b > 0) return b;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, n) on up to n_threads workers. Indices are dealt in
// contiguous static chunks, so the assignment to workers is deterministic.
// The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t n_threads = 0) {
    if (n == 0) return;
    if (n_threads == 0) n_threads = hardware_threads();
    n_threads = std::min(n_threads, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(n_threads);
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, t] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// Deterministic blocked reduction: sums fn(i) over [0, n) in fixed blocks and
// adds block totals in index order, so the result is bitwise identical for
// any thread count.
template <typename Fn>
double parallel_block_sum(std::size_t n, Fn&& fn, std::size_t block = 4096,
                          std::size_t n_threads = 0) {
    if (n == 0) return 0.0;
    const std::size_t n_blocks = (n + block - 1) / block;
    std::vector<double> partial(n_blocks, 0.0);
    parallel_for(n_blocks, [&](std::size_t b) {
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(n, lo + block);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += fn(i);
        partial[b] = s;
    }, n_threads);
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

} // namespace sdec

#endif
