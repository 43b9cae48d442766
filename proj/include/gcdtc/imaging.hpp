// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gcdtc/loss.hpp"
#include "gcdtc/tensor.hpp"

namespace gcdtc {

/// Raw binary netpbm raster (P5 or P6, maxval 255), samples in file order.
struct PnmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0;  // 1 for P5, 3 for P6
    std::vector<std::uint8_t> samples;

    friend bool operator==(const PnmImage&, const PnmImage&) = default;
};

/// Parses P5/P6 with maxval 255. `#` comments are allowed in the header.
/// Throws std::runtime_error on malformed headers or truncated payloads.
[[nodiscard]] PnmImage parse_pnm(std::span<const std::uint8_t> bytes);
[[nodiscard]] std::vector<std::uint8_t> encode_pnm(const PnmImage& image);

[[nodiscard]] PnmImage read_pnm(const std::filesystem::path& path);
void write_pnm(const PnmImage& image, const std::filesystem::path& path);

// Images are H x W x C tensors (row, column, channel) with values in [0, 255].

[[nodiscard]] DenseTensor to_tensor(const PnmImage& image);
/// Rounds half up, then clamps to [0, 255]. C must be 1 or 3.
[[nodiscard]] PnmImage to_pnm(const DenseTensor& image);

[[nodiscard]] DenseTensor read_ppm(const std::filesystem::path& path);
void write_ppm(const DenseTensor& image, const std::filesystem::path& path);

/// Mask as a P5 raster of width W*C and height H, samples laid out like the
/// image payload; 255 = observed, 0 = missing.
void write_mask_pgm(const ObservationMask& mask, const std::filesystem::path& path);
/// Reads a mask for an image of the given H x W x C shape; any nonzero sample
/// counts as observed.
[[nodiscard]] ObservationMask read_mask_pgm(const std::filesystem::path& path,
                                            const Shape& image_shape);

struct CorruptionSpec {
    double missing_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Hides exactly round(missing_rate * numel) entries chosen by a seeded
/// shuffle. The returned tensor is the input; the mask is authoritative.
[[nodiscard]] std::pair<DenseTensor, ObservationMask> corrupt(const DenseTensor& t,
                                                              const CorruptionSpec& spec);

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// 10 log10(255^2 / MSE) over all voxels after clamping both inputs to
/// [0, 255]; identical inputs give kPsnrInfinity.
[[nodiscard]] double psnr(const DenseTensor& a, const DenseTensor& b);

/// PSNR restricted to the entries the mask marks missing. NaN if none are.
[[nodiscard]] double psnr_missing(const DenseTensor& a, const DenseTensor& b,
                                  const ObservationMask& mask);

struct PoissonInstance {
    DenseTensor ground_truth;
    DenseTensor sample;
};

/// Ground truth = scale * reconstruct(uniform (0,1] rank-r factors); the
/// sample draws Poisson(ground_truth) elementwise. Deterministic per seed.
[[nodiscard]] PoissonInstance synth_poisson_lowrank(const Shape& shape, std::size_t rank,
                                                    double scale, std::uint64_t seed);

/// CSV with header `sweep,objective`, one row per history entry.
void write_history_csv(std::span<const double> history, const std::filesystem::path& path);
[[nodiscard]] std::vector<double> read_history_csv(const std::filesystem::path& path);

}  // namespace gcdtc
