#ifndef EMBROBUST_PARALLEL_HPP
#define EMBROBUST_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

/**
 * @file parallel.hpp
 *
 * @brief Minimal static-partition parallel loop.
 */

namespace embrobust {

/**
 * @return Number of workers to use when the caller asks for `requested` (0 means all hardware threads).
 */
inline int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    auto hw = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, hw);
}

/**
 * Run `fun(start, end)` over contiguous chunks of `[0, n)` on up to `num_threads` workers.
 * Each index is visited by exactly one worker, so any per-index output is independent of the worker count.
 * The first exception thrown by a worker is rethrown in the caller.
 */
template<class Function>
void parallel_for(std::size_t n, int num_threads, Function fun) {
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(num_threads)), n);
    if (workers <= 1) {
        if (n) {
            fun(std::size_t(0), n);
        }
        return;
    }

    std::size_t chunk = n / workers, extra = n % workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_lock;

    std::size_t start = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t len = chunk + (w < extra ? 1 : 0);
        pool.emplace_back([&, start, len]() {
            try {
                fun(start, start + len);
            } catch (...) {
                std::lock_guard<std::mutex> guard(failure_lock);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
        start += len;
    }

    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}

#endif
