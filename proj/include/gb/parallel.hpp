#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace gb {

/// Run fn(i) for i in [0, n) over `workers` threads. Work items write into
/// caller-owned slots indexed by i, so the merged result is identical for
/// every worker count. The lowest-index exception, if any, is rethrown.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int count = std::min<int>(workers, static_cast<int>(n));
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < n;
                 i += static_cast<std::size_t>(count)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace gb
