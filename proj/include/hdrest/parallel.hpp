#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hdrest {

/// Worker threads used by parallel loops: HDREST_THREADS if set, else the
/// hardware concurrency. set_worker_count(0) restores the default.
std::size_t worker_count();
void set_worker_count(std::size_t n);

namespace detail {
inline thread_local bool in_worker = false;
}

/// Calls f(i) for every i in [0, n) exactly once. Indices are split into
/// contiguous blocks, so callers that write only to slot i get results that
/// do not depend on the number of threads. Calls made from inside a worker run
/// inline.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = detail::in_worker ? 1 : std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            detail::in_worker = true;
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace hdrest
