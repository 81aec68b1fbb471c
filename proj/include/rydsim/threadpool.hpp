#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rydsim {

/// Runs fn(chunk_index) for chunk_index in [0, n_chunks) on `workers`
/// threads. Chunks are claimed dynamically, so call sites must make each
/// chunk self-contained and merge results in chunk order afterwards; that
/// keeps reductions independent of the worker count and of scheduling.
inline void parallel_chunks(std::size_t n_chunks, unsigned workers,
                            const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            try {
                fn(c);
            } catch (...) {
                std::scoped_lock lk(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };

    std::vector<std::thread> threads;
    const unsigned n_threads = std::min<std::size_t>(workers, n_chunks);
    threads.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

inline unsigned default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

}  // namespace rydsim
