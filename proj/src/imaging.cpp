// SPDX-License-Identifier: MIT
#include "gcdtc/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gcdtc/solver.hpp"

namespace gcdtc {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Skips whitespace and `#` comments, then reads a decimal field.
    std::size_t read_uint(const char* what) {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1u << 30)) throw std::runtime_error(std::string("pnm: ") + what + " too large");
            ++pos_;
            ++digits;
        }
        if (digits == 0) throw std::runtime_error(std::string("pnm: malformed header, expected ") + what);
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void expect_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw std::runtime_error("pnm: malformed header, missing separator before raster");
        }
        ++pos_;
    }

    [[nodiscard]] std::size_t position() const { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint8_t to_byte(double v) {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::min(r, 255.0));
}

double clamp_pixel(double v) { return std::clamp(v, 0.0, 255.0); }

double mse_to_psnr(double mse) {
    if (mse == 0.0) return kPsnrInfinity;
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

void check_image_shape(const Shape& shape) {
    if (shape.size() != 3 || (shape[2] != 1 && shape[2] != 3)) {
        throw std::invalid_argument("image tensors must be H x W x C with C in {1, 3}");
    }
}

}  // namespace

PnmImage parse_pnm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw std::runtime_error("pnm: unsupported magic (expected P5 or P6)");
    }
    PnmImage img;
    img.channels = bytes[1] == '6' ? 3 : 1;
    HeaderReader header(bytes);
    img.width = header.read_uint("width");
    img.height = header.read_uint("height");
    const std::size_t maxval = header.read_uint("maxval");
    if (img.width == 0 || img.height == 0) throw std::runtime_error("pnm: zero image dimension");
    if (maxval != 255) {
        throw std::runtime_error("pnm: maxval " + std::to_string(maxval) + " is not supported (need 255)");
    }
    header.expect_single_space();
    if (img.width > bytes.size() || img.height > bytes.size() / img.width) {
        throw std::runtime_error("pnm: truncated raster (dimensions exceed file size)");
    }
    const std::size_t need = img.width * img.height * img.channels;
    const std::size_t start = header.position();
    if (bytes.size() - start < need) {
        throw std::runtime_error("pnm: truncated raster (" + std::to_string(bytes.size() - start) +
                                 " of " + std::to_string(need) + " bytes)");
    }
    img.samples.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                       bytes.begin() + static_cast<std::ptrdiff_t>(start + need));
    return img;
}

std::vector<std::uint8_t> encode_pnm(const PnmImage& image) {
    if (image.channels != 1 && image.channels != 3) throw std::invalid_argument("pnm: channels must be 1 or 3");
    if (image.samples.size() != image.width * image.height * image.channels) {
        throw std::invalid_argument("pnm: sample count does not match dimensions");
    }
    const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" +
                               std::to_string(image.width) + " " + std::to_string(image.height) +
                               "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.samples.begin(), image.samples.end());
    return out;
}

PnmImage read_pnm(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return parse_pnm(bytes);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_pnm(const PnmImage& image, const std::filesystem::path& path) {
    write_file(path, encode_pnm(image));
}

DenseTensor to_tensor(const PnmImage& image) {
    const std::size_t h = image.height;
    const std::size_t w = image.width;
    const std::size_t c = image.channels;
    DenseTensor t(Shape{h, w, c});
    for (std::size_t row = 0; row < h; ++row) {
        for (std::size_t col = 0; col < w; ++col) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                t[row + h * (col + w * ch)] = image.samples[(row * w + col) * c + ch];
            }
        }
    }
    return t;
}

PnmImage to_pnm(const DenseTensor& image) {
    check_image_shape(image.shape());
    PnmImage out;
    out.height = image.extent(0);
    out.width = image.extent(1);
    out.channels = image.extent(2);
    const std::size_t h = out.height;
    const std::size_t w = out.width;
    const std::size_t c = out.channels;
    out.samples.resize(h * w * c);
    for (std::size_t row = 0; row < h; ++row) {
        for (std::size_t col = 0; col < w; ++col) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                out.samples[(row * w + col) * c + ch] = to_byte(image[row + h * (col + w * ch)]);
            }
        }
    }
    return out;
}

DenseTensor read_ppm(const std::filesystem::path& path) { return to_tensor(read_pnm(path)); }

void write_ppm(const DenseTensor& image, const std::filesystem::path& path) {
    write_pnm(to_pnm(image), path);
}

void write_mask_pgm(const ObservationMask& mask, const std::filesystem::path& path) {
    check_image_shape(mask.shape());
    DenseTensor levels(mask.shape());
    for (std::size_t i = 0; i < mask.size(); ++i) levels[i] = mask[i] ? 255.0 : 0.0;
    PnmImage img = to_pnm(levels);
    img.width *= img.channels;
    img.channels = 1;
    write_pnm(img, path);
}

ObservationMask read_mask_pgm(const std::filesystem::path& path, const Shape& image_shape) {
    check_image_shape(image_shape);
    PnmImage img = read_pnm(path);
    const std::size_t c = image_shape[2];
    if (img.channels != 1 || img.height != image_shape[0] || img.width != image_shape[1] * c) {
        throw std::runtime_error(path.string() + ": mask must be a P5 raster of " +
                                 std::to_string(image_shape[1] * c) + "x" +
                                 std::to_string(image_shape[0]) + " for this image");
    }
    img.width /= c;
    img.channels = c;
    const DenseTensor levels = to_tensor(img);
    std::vector<std::uint8_t> flags(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) flags[i] = levels[i] != 0.0 ? 1 : 0;
    return ObservationMask(image_shape, std::move(flags));
}

std::pair<DenseTensor, ObservationMask> corrupt(const DenseTensor& t, const CorruptionSpec& spec) {
    if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) {
        throw std::invalid_argument("missing rate must lie in [0, 1)");
    }
    const std::size_t n = t.size();
    const auto missing = static_cast<std::size_t>(std::llround(spec.missing_rate * static_cast<double>(n)));
    if (missing >= n) {
        throw std::invalid_argument("missing rate " + std::to_string(spec.missing_rate) +
                                    " leaves no observed entries");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    ObservationMask mask(t.shape(), true);
    for (std::size_t k = 0; k < missing; ++k) mask.set(order[k], false);
    return {t, std::move(mask)};
}

double psnr(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("psnr: shapes differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = clamp_pixel(a[i]) - clamp_pixel(b[i]);
        sum += d * d;
    }
    return mse_to_psnr(sum / static_cast<double>(a.size()));
}

double psnr_missing(const DenseTensor& a, const DenseTensor& b, const ObservationMask& mask) {
    if (a.shape() != b.shape() || a.shape() != mask.shape()) {
        throw std::invalid_argument("psnr: shapes differ");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask[i]) continue;
        const double d = clamp_pixel(a[i]) - clamp_pixel(b[i]);
        sum += d * d;
        ++count;
    }
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    return mse_to_psnr(sum / static_cast<double>(count));
}

PoissonInstance synth_poisson_lowrank(const Shape& shape, std::size_t rank, double scale,
                                      std::uint64_t seed) {
    if (rank == 0) throw std::invalid_argument("rank must be >= 1");
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be > 0");
    // Independent streams for the factors and for the Poisson draws.
    std::seed_seq factor_seq{seed, std::uint64_t{0x9e3779b97f4a7c15ull}};
    std::seed_seq sample_seq{seed, std::uint64_t{0xc2b2ae3d27d4eb4full}};
    std::mt19937_64 factor_rng(factor_seq);
    std::mt19937_64 sample_rng(sample_seq);

    PoissonInstance out;
    out.ground_truth = reconstruct(init_factors(shape, rank, factor_rng()));
    for (double& v : out.ground_truth.values()) v *= scale;
    out.sample = DenseTensor(shape);
    for (std::size_t i = 0; i < out.sample.size(); ++i) {
        std::poisson_distribution<long long> draw(out.ground_truth[i]);
        out.sample[i] = static_cast<double>(draw(sample_rng));
    }
    return out;
}

void write_history_csv(std::span<const double> history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "sweep,objective\n";
    char buf[64];
    for (std::size_t k = 0; k < history.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", history[k]);
        out << k << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<double> read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "sweep,objective") {
        throw std::runtime_error(path.string() + ": missing `sweep,objective` header");
    }
    std::vector<double> history;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error(path.string() + ": malformed row");
        history.push_back(std::stod(line.substr(comma + 1)));
    }
    return history;
}

}  // namespace gcdtc
