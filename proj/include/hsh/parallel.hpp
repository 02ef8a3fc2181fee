#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace hsh {

//! Worker count: HSH_WORKERS if set (clamped to [1, 256]), otherwise the
//! hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("HSH_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

//! Runs f(i) for i in [0, count). Work is assigned by index stride, so which
//! worker runs which index is a function of the worker count alone; callers
//! must write results into pre-sized slots (never merge by arrival order) to
//! keep outputs identical across worker counts.
template <typename F>
inline void parallel_for(std::size_t count, F&& f) {
    const std::size_t workers =
        std::min<std::size_t>(worker_count(), count == 0 ? 1 : count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace hsh
