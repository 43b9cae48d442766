// SPDX-License-Identifier: MIT
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gcdtc::cli {

/// Fixed header of the bench report.
inline constexpr const char* kBenchHeader =
    "image,mr,loss,seed,psnr_all,psnr_missing,sweeps,seconds,status";

/// Runs one command line (without the program name), e.g.
/// {"psnr", "--ref", "a.ppm", "--test", "b.ppm"}.
/// Returns 0 on success, 1 on a failed computation and 2 on a usage error.
/// Results go to `out`; progress and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gcdtc::cli
