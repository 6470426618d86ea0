#pragma once
// Minimal index-space parallel loop. Nested calls run serially so callers can
// parallelize at whatever level they sit without oversubscribing.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rrcdsp {

inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : std::min(n, 16u);
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

template <typename F>
void parallel_for(std::size_t n, F&& body, std::size_t grain = 1) {
    const unsigned workers = worker_count();
    if (n == 0) return;
    if (detail::in_parallel_region || workers == 1 || n <= grain) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(workers, (n + grain - 1) / grain);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t c = 0; c < chunks; ++c) {
        pool.emplace_back([&, c] {
            detail::in_parallel_region = true;
            const std::size_t begin = n * c / chunks;
            const std::size_t end = n * (c + 1) / chunks;
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace rrcdsp
