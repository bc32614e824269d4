#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "fd/errors.hpp"

namespace fd {

// Worker count: explicit flag wins, then the FD_THREADS environment variable,
// then the hardware count. Always at least 1.
inline int resolve_threads(int flag_value = 0) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("FD_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("FD_THREADS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run fn(block) for block = 0..n_blocks-1 on up to `threads` workers.
// Blocks must write disjoint state; the scheduling order is unspecified, so
// determinism is the blocks' responsibility (disjoint slices + sequential
// reductions afterwards).
template <class Fn>
void parallel_blocks(std::uint64_t n_blocks, int threads, Fn&& fn) {
    if (threads <= 1 || n_blocks <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::uint64_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(std::min<std::uint64_t>(threads, n_blocks));
    pool.reserve(n_workers - 1);
    for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace fd
