// SPDX-License-Identifier: MIT
#include "gcdtc/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gcdtc {

namespace {
constexpr std::size_t kMinParallelWork = 1u << 18;
}

std::size_t kernel_threads() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GCDTC_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
        } catch (const std::exception&) {
            // unparsable values are ignored
        }
    }
    return n;
}

void parallel_for(std::size_t n, std::size_t work,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::min(kernel_threads(), n);
    if (workers <= 1 || work < kMinParallelWork) {
        if (n > 0) body(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
}

}  // namespace gcdtc
