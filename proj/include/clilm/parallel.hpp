#pragma once

// Bounded task parallelism over an index range. Each index runs exactly
// once; callers write results into per-index slots so the outcome does
// not depend on scheduling.

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace clilm {

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (count == 0) return;
    if (jobs <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

inline unsigned default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace clilm
