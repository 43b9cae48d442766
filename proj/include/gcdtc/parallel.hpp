// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <functional>

namespace gcdtc {

/// Worker count for the dense kernels: hardware concurrency, capped by the
/// GCDTC_THREADS environment variable when it holds a positive integer.
[[nodiscard]] std::size_t kernel_threads();

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
/// Runs inline when `work` (an estimate of the flop count) is small or only
/// one worker is available. Callers must make each chunk write disjoint
/// output so results do not depend on the chunking.
void parallel_for(std::size_t n, std::size_t work,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace gcdtc
