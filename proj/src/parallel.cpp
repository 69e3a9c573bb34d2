#include "micrlb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace micrlb {

namespace {

unsigned initial_thread_count() {
    if (const char* env = std::getenv("MICRLB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{initial_thread_count()};
    return n;
}

}  // namespace

unsigned thread_count() { return thread_setting().load(); }

void set_thread_count(unsigned n) { thread_setting().store(std::max(1u, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    // Lowest failing index wins so the reported error is schedule-independent.
    std::size_t first_index = n;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (i < first_index) {
                            first_index = i;
                            first_error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace micrlb
