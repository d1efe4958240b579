#pragma once

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace effc {

/// Worker count: EFFC_THREADS if set, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("EFFC_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs fn(replica_index) for indices [0, n) across worker threads and
/// returns the results ordered by replica index, so parallelism never
/// changes the merged output. Each fn call must own its RNG stream.
template <class Fn>
auto replica_map(std::int64_t n, Fn&& fn) {
    using Result = decltype(fn(std::int64_t{0}));
    std::vector<Result> results(static_cast<std::size_t>(n));
    const unsigned workers = thread_count();
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers)
                results[static_cast<std::size_t>(i)] = fn(i);
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace effc
