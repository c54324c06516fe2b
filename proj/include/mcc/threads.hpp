#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

#include "mcc/prelude.hpp"

namespace mcc {

// Worker count: explicit request > MCC_WORKERS env > hardware concurrency.
inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MCC_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Static block partition over [0, count); each index is processed exactly
// once and results land wherever fn writes them, so output order never
// depends on the worker count.
template <typename F>
void parallel_for(Index count, unsigned workers, F&& fn) {
    workers = resolve_workers(workers);
    if (workers <= 1 || count < 2) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    const Index nthreads = std::min<Index>(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (Index t = 0; t < nthreads; ++t) {
        pool.emplace_back([=]() {
            const Index lo = count * t / nthreads;
            const Index hi = count * (t + 1) / nthreads;
            for (Index i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace mcc
