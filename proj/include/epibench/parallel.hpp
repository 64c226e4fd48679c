#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace epibench {

/// Runs task(i) for i in [0, count) on `workers` threads pulling indices from a
/// shared counter. Results must be written to per-index slots by the task, so
/// output never depends on scheduling. The exception from the lowest failing
/// index is rethrown after all workers stop; remaining work is skipped once a
/// failure is seen.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& task)
{
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };

    std::vector<std::jthread> pool;
    const std::size_t n = std::min(workers, count);
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
        pool.emplace_back(worker);
    }
    pool.clear();

    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace epibench
