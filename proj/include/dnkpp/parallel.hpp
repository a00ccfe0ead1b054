#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dnkpp {

/// Runs fn(i) for i in [0, n) on up to `threads` workers with a fixed
/// round-robin assignment. The first exception (by index) is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto work = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (nt == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < n; i += nt) work(i);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace dnkpp
