#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace helfrich {

// Errors map onto CLI exit codes: rejected input -> 1, numerical failure -> 2.
struct RejectedInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw RejectedInput(what);
}

/// Shortest decimal string that round-trips the exact double value.
inline std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Single seeded generator shared by everything that needs randomness.
using Rng = std::mt19937_64;

// Chunked map-reduce with a reduction order that is fixed by the chunk
// grid, not by the thread count, so sums are bit-identical for any
// number of workers. Chunk partials are written into their own slots and
// combined sequentially in chunk order.
template <typename T, typename MapFn>
T chunked_sum(std::size_t n, int n_threads, MapFn&& chunk_sum_fn, T zero = T{}) {
    constexpr std::size_t kChunks = 256;
    const std::size_t chunks = n < kChunks ? (n == 0 ? 0 : 1) : kChunks;
    if (chunks == 0) return zero;
    std::vector<T> partial(chunks, zero);
    auto run_chunk = [&](std::size_t c) {
        std::size_t lo = n * c / chunks;
        std::size_t hi = n * (c + 1) / chunks;
        partial[c] = chunk_sum_fn(lo, hi);
    };
    if (n_threads <= 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t]() {
                for (std::size_t c = static_cast<std::size_t>(t); c < chunks;
                     c += static_cast<std::size_t>(n_threads))
                    run_chunk(c);
            });
        }
        for (auto& th : pool) th.join();
    }
    T acc = zero;
    for (std::size_t c = 0; c < chunks; ++c) acc += partial[c];
    return acc;
}

// Parallel for over [0, n); deterministic because workers write disjoint slots.
inline void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn) {
    if (n_threads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = static_cast<std::size_t>(t); i < n;
                 i += static_cast<std::size_t>(n_threads))
                fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace helfrich
