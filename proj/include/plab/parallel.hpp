#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace plab {

// Worker cap from PRECISION_LAB_THREADS; 0 means run serially. Unset or
// unparsable falls back to the hardware concurrency.
inline std::size_t configured_threads() {
    if (const char* env = std::getenv("PRECISION_LAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Evaluates fn(0..n-1), results in index order regardless of scheduling.
// The exception of the lowest failing index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn, std::size_t threads = configured_threads())
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<Result> results(n);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        const std::size_t workers = threads < n ? threads : n;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        results[i] = fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace plab
