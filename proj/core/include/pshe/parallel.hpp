#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pshe {

//! Runs fn(i) for i in [0, count) on up to `threads` workers; results are returned in index
//! order so reductions downstream do not depend on scheduling.
template <class Fn>
auto run_indexed(std::int64_t count, int threads, Fn&& fn)
{
    using Result = decltype(fn(std::int64_t{}));
    std::vector<Result> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    const int workers = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(count, 1)));
    if (workers == 1) {
        for (std::int64_t i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] = fn(i);
        }
        return out;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::int64_t i = next++; i < count; i = next++) {
                try {
                    out[static_cast<std::size_t>(i)] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

}  // namespace pshe
